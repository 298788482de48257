"""Interactive inspection session: screens, catalog, model transform.

The flow mirrors a phone app: a camera permission gate, an edit view for
picking or uploading a model and posing it, and an AR view where the
live marker drives the model's spin. State is immutable; applying an
event returns a new state, which is what makes replay scripts exact.

Control assignment is deliberately rigid: the x and z rotation buttons
are the only writers of rot_x and rot_z, and the marker is the only
writer of rot_y. Losing the marker hides the overlay but keeps the last
yaw, so the model does not snap when tracking drops for a frame.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .analysis import ModelTransform, fit_transform
from .stl import IndexedMesh


class ScaleMode(enum.Enum):
    FIT_TO_TARGET = "fit_to_target"
    TRUE_SIZE = "true_size"


class Screen(enum.Enum):
    CAMERA_PERMISSION = "camera_permission"
    EDIT_VIEW = "edit_view"
    AR_VIEW = "ar_view"


@dataclass(frozen=True)
class SessionConfig:
    rotation_step: float = math.pi / 12
    zoom_step: float = 1.25
    zoom_min: float = 0.25
    zoom_max: float = 4.0
    target_extent: float = 80.0
    scale_mode: ScaleMode = ScaleMode.FIT_TO_TARGET

    def __post_init__(self):
        if self.zoom_step <= 1.0:
            raise ValueError("zoom step must exceed 1")
        if not 0.0 < self.zoom_min <= 1.0 <= self.zoom_max:
            raise ValueError("zoom bounds must bracket 1")
        if self.target_extent <= 0 or self.rotation_step <= 0:
            raise ValueError("steps must be positive")


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    mesh: IndexedMesh
    category: str | None = None


# Events. Frozen so a recorded script can share them safely.


@dataclass(frozen=True)
class GrantCamera:
    pass


@dataclass(frozen=True)
class SelectCategory:
    name: str


@dataclass(frozen=True)
class NextModel:
    pass


@dataclass(frozen=True)
class PrevModel:
    pass


@dataclass(frozen=True)
class OpenFolder:
    pass


@dataclass(frozen=True)
class UploadModel:
    name: str
    mesh: IndexedMesh
    category: str | None = None


@dataclass(frozen=True)
class EnterAR:
    pass


@dataclass(frozen=True)
class EnterEdit:
    pass


@dataclass(frozen=True)
class RotateX:
    sign: int = 1


@dataclass(frozen=True)
class RotateZ:
    sign: int = 1


@dataclass(frozen=True)
class ZoomIn:
    pass


@dataclass(frozen=True)
class ZoomOut:
    pass


@dataclass(frozen=True)
class YawDetection:
    """Marker observation reduced to what the session consumes."""

    yaw: float


@dataclass(frozen=True)
class MarkerUpdate:
    detection: object | None  # anything with a .yaw, or None when lost


Event = object


@dataclass(frozen=True)
class SessionState:
    config: SessionConfig
    catalog: tuple[CatalogEntry, ...]
    screen: Screen = Screen.CAMERA_PERMISSION
    selected: int | None = None
    category_filter: str | None = None
    zoom: float = 1.0
    rot_x: float = 0.0
    rot_z: float = 0.0
    last_yaw: float = 0.0
    marker_visible: bool = False
    base_scale: float = 1.0
    base_translation: tuple[float, float, float] = (0.0, 0.0, 0.0)
    note: str | None = None

    @property
    def selected_entry(self) -> CatalogEntry | None:
        return self.catalog[self.selected] if self.selected is not None else None

    @property
    def transform(self) -> ModelTransform:
        return ModelTransform(
            rot_x=self.rot_x,
            rot_y=self.last_yaw,
            rot_z=self.rot_z,
            scale=self.base_scale * self.zoom,
            translation=np.array(self.base_translation),
        )

    def model_center(self) -> np.ndarray:
        entry = self.selected_entry
        if entry is None:
            return np.zeros(3)
        lo, hi = entry.mesh.bbox()
        return 0.5 * (lo + hi)


def _base_for(mesh: IndexedMesh, config: SessionConfig) -> tuple[float, tuple]:
    if config.scale_mode is ScaleMode.FIT_TO_TARGET:
        t = fit_transform(mesh, config.target_extent)
        return t.scale, tuple(t.translation)
    lo, hi = mesh.bbox()
    center = 0.5 * (lo + hi)
    return 1.0, tuple(-center)


def _with_selection(state: SessionState, index: int | None, **extra) -> SessionState:
    """Select a model and reset the posing transform around it."""
    if index is None:
        return replace(
            state, selected=None, zoom=1.0, rot_x=0.0, rot_z=0.0,
            base_scale=1.0, base_translation=(0.0, 0.0, 0.0), note=None, **extra,
        )
    scale, translation = _base_for(state.catalog[index].mesh, state.config)
    return replace(
        state, selected=index, zoom=1.0, rot_x=0.0, rot_z=0.0,
        base_scale=scale, base_translation=translation, note=None, **extra,
    )


def init_session(config: SessionConfig, catalog: list[CatalogEntry]) -> SessionState:
    state = SessionState(config=config, catalog=tuple(catalog))
    if catalog:
        state = _with_selection(state, 0)
    return state


def _ignored(state: SessionState, reason: str) -> SessionState:
    return replace(state, note=f"ignored: {reason}")


def _filtered_indices(state: SessionState) -> list[int]:
    if state.category_filter is None:
        return list(range(len(state.catalog)))
    return [
        i for i, e in enumerate(state.catalog) if e.category == state.category_filter
    ]


def _cycle(state: SessionState, step: int) -> SessionState:
    indices = _filtered_indices(state)
    if not indices:
        return _ignored(state, "no models to cycle through")
    if state.selected not in indices:
        return _with_selection(state, indices[0])
    pos = indices.index(state.selected)
    return _with_selection(state, indices[(pos + step) % len(indices)])


def apply_event(state: SessionState, event: Event) -> SessionState:
    """One step of the session; unknown or out-of-place events become
    no-ops with an explanatory note instead of raising."""
    state = replace(state, note=None)
    screen = state.screen

    if isinstance(event, GrantCamera):
        if screen is not Screen.CAMERA_PERMISSION:
            return _ignored(state, "camera already granted")
        return replace(state, screen=Screen.EDIT_VIEW)

    if screen is Screen.CAMERA_PERMISSION:
        return _ignored(state, "camera permission not granted yet")

    if isinstance(event, EnterAR):
        if screen is not Screen.EDIT_VIEW:
            return _ignored(state, "not in edit view")
        return replace(state, screen=Screen.AR_VIEW)

    if isinstance(event, EnterEdit):
        if screen is not Screen.AR_VIEW:
            return _ignored(state, "not in AR view")
        return replace(state, screen=Screen.EDIT_VIEW, marker_visible=False)

    if isinstance(event, (SelectCategory, NextModel, PrevModel, OpenFolder, UploadModel)):
        if screen is not Screen.EDIT_VIEW:
            return _ignored(state, "catalog actions belong to the edit view")
        if isinstance(event, SelectCategory):
            probe = replace(state, category_filter=event.name)
            indices = _filtered_indices(probe)
            return _with_selection(
                probe, indices[0] if indices else None, category_filter=event.name
            )
        if isinstance(event, NextModel):
            return _cycle(state, +1)
        if isinstance(event, PrevModel):
            return _cycle(state, -1)
        if isinstance(event, OpenFolder):
            return _with_selection(state, None)
        catalog = state.catalog + (CatalogEntry(event.name, event.mesh, event.category),)
        grown = replace(state, catalog=catalog, category_filter=None)
        return _with_selection(grown, len(catalog) - 1)

    if isinstance(event, MarkerUpdate):
        if screen is not Screen.AR_VIEW:
            return _ignored(state, "marker updates only apply in AR view")
        if event.detection is None:
            return replace(state, marker_visible=False)
        return replace(
            state, marker_visible=True, last_yaw=float(event.detection.yaw)
        )

    if isinstance(event, (RotateX, RotateZ, ZoomIn, ZoomOut)):
        if state.selected is None:
            return _ignored(state, "no model selected")
        step = state.config.rotation_step
        if isinstance(event, RotateX):
            return replace(state, rot_x=state.rot_x + step * float(np.sign(event.sign)))
        if isinstance(event, RotateZ):
            return replace(state, rot_z=state.rot_z + step * float(np.sign(event.sign)))
        factor = state.config.zoom_step if isinstance(event, ZoomIn) else 1.0 / state.config.zoom_step
        zoom = min(max(state.zoom * factor, state.config.zoom_min), state.config.zoom_max)
        return replace(state, zoom=zoom)

    return _ignored(state, f"unrecognized event {type(event).__name__}")


def replay(config: SessionConfig, catalog: list[CatalogEntry], events) -> SessionState:
    state = init_session(config, catalog)
    for event in events:
        state = apply_event(state, event)
    return state


# Script serialization. Upload events are stored by model name; the
# caller supplies a resolver that turns the name back into a mesh, e.g.
# by loading <name>.stl from a catalog directory.


def event_to_dict(event: Event) -> dict:
    if isinstance(event, GrantCamera):
        return {"type": "grant_camera"}
    if isinstance(event, SelectCategory):
        return {"type": "select_category", "name": event.name}
    if isinstance(event, NextModel):
        return {"type": "next_model"}
    if isinstance(event, PrevModel):
        return {"type": "prev_model"}
    if isinstance(event, OpenFolder):
        return {"type": "open_folder"}
    if isinstance(event, UploadModel):
        d = {"type": "upload_model", "name": event.name}
        if event.category is not None:
            d["category"] = event.category
        return d
    if isinstance(event, EnterAR):
        return {"type": "enter_ar"}
    if isinstance(event, EnterEdit):
        return {"type": "enter_edit"}
    if isinstance(event, RotateX):
        return {"type": "rotate_x", "sign": int(event.sign)}
    if isinstance(event, RotateZ):
        return {"type": "rotate_z", "sign": int(event.sign)}
    if isinstance(event, ZoomIn):
        return {"type": "zoom_in"}
    if isinstance(event, ZoomOut):
        return {"type": "zoom_out"}
    if isinstance(event, MarkerUpdate):
        if event.detection is None:
            return {"type": "marker_update", "detection": None}
        return {
            "type": "marker_update",
            "detection": {"yaw_rad": float(event.detection.yaw)},
        }
    raise ValueError(f"cannot serialize event {type(event).__name__}")


def event_from_dict(data: dict, resolve_model=None) -> Event:
    kind = data.get("type")
    simple = {
        "grant_camera": GrantCamera,
        "next_model": NextModel,
        "prev_model": PrevModel,
        "open_folder": OpenFolder,
        "enter_ar": EnterAR,
        "enter_edit": EnterEdit,
        "zoom_in": ZoomIn,
        "zoom_out": ZoomOut,
    }
    if kind in simple:
        return simple[kind]()
    if kind == "select_category":
        return SelectCategory(str(data["name"]))
    if kind == "rotate_x":
        return RotateX(int(data.get("sign", 1)))
    if kind == "rotate_z":
        return RotateZ(int(data.get("sign", 1)))
    if kind == "marker_update":
        det = data.get("detection")
        if det is None:
            return MarkerUpdate(None)
        return MarkerUpdate(YawDetection(float(det["yaw_rad"])))
    if kind == "upload_model":
        if resolve_model is None:
            raise ValueError("upload_model events need a model resolver")
        name = str(data["name"])
        return UploadModel(name, resolve_model(name), data.get("category"))
    raise ValueError(f"unknown event type {kind!r}")


def state_to_dict(state: SessionState) -> dict:
    entry = state.selected_entry
    t = state.transform
    return {
        "screen": state.screen.value,
        "catalog": [e.name for e in state.catalog],
        "selected": entry.name if entry else None,
        "selected_index": state.selected,
        "category_filter": state.category_filter,
        "scale_mode": state.config.scale_mode.value,
        "zoom": state.zoom,
        "base_scale": state.base_scale,
        "marker_visible": state.marker_visible,
        "transform": {
            "rot_x_rad": t.rot_x,
            "rot_y_rad": t.rot_y,
            "rot_z_rad": t.rot_z,
            "scale": t.scale,
            "translation_mm": [float(v) for v in t.translation],
        },
        "note": state.note,
    }
