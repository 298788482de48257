"""Request and response bodies for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class SessionCreate(BaseModel):
    scale_mode: str = "fit_to_target"
    target_extent: float = Field(80.0, gt=0)
    rotation_step: float | None = None
    zoom_step: float | None = None
    marker_side: float = Field(80.0, gt=0, description="Physical marker side, mm")
    fx: float = Field(800.0, gt=0)
    fy: float = Field(800.0, gt=0)
    cx: float | None = None  # defaults to the frame center at detect time
    cy: float | None = None
    include_demo_catalog: bool = True


class TransformOut(BaseModel):
    rot_x_rad: float
    rot_y_rad: float
    rot_z_rad: float
    scale: float
    translation_mm: list[float]


class StateOut(BaseModel):
    screen: str
    catalog: list[str]
    selected: str | None
    selected_index: int | None
    category_filter: str | None
    scale_mode: str
    zoom: float
    base_scale: float
    marker_visible: bool
    transform: TransformOut
    note: str | None


class SessionOut(BaseModel):
    session_id: str
    state: StateOut


class EventIn(BaseModel):
    """Script-format event; upload_model is rejected here because the
    mesh body travels through the dedicated model endpoint."""

    type: str
    sign: int | None = None
    name: str | None = None
    detection: dict | None = None


class BoundaryLoopOut(BaseModel):
    closed: bool
    vertices: list[int]


class ReportOut(BaseModel):
    alignment_metric: str
    bbox_max_mm: list[float]
    bbox_min_mm: list[float]
    boundary_loop_count: int
    boundary_loops: list[BoundaryLoopOut]
    component_count: int
    component_separation_mm: float | None
    connectivity: str
    degenerate_face_indices: list[int]
    max_normal_deviation_deg: float
    nonmanifold_edge_count: int
    normals_absent: bool
    orientation_consistent: bool
    orientation_inverted: bool
    signed_volume_mm3: float
    watertight: bool


class MeshOut(BaseModel):
    name: str
    vertices: list[list[float]]
    faces: list[list[int]]


class ModelUploadOut(BaseModel):
    state: StateOut
    report: ReportOut
    mesh: MeshOut


class DetectionOut(BaseModel):
    confidence: float
    rotation_index: int
    yaw_rad: float
    corners_px: list[list[float]]
    rotation: list[list[float]]
    translation_mm: list[float]
    reproj_error_px2: float


class FrameOut(BaseModel):
    detection: DetectionOut | None
    state: StateOut


class MeshWithReportOut(BaseModel):
    mesh: MeshOut | None
    report: ReportOut | None
