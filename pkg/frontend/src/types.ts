/** Wire types, mirroring the service's JSON bodies field for field. */

export type Screen = "camera_permission" | "edit_view" | "ar_view";
export type ScaleMode = "fit_to_target" | "true_size";

export interface TransformDto {
  rot_x_rad: number;
  rot_y_rad: number;
  rot_z_rad: number;
  scale: number;
  translation_mm: number[];
}

export interface SessionStateDto {
  screen: Screen;
  catalog: string[];
  selected: string | null;
  selected_index: number | null;
  category_filter: string | null;
  scale_mode: ScaleMode;
  zoom: number;
  base_scale: number;
  marker_visible: boolean;
  transform: TransformDto;
  note: string | null;
}

export interface DetectionDto {
  confidence: number;
  rotation_index: number;
  yaw_rad: number;
  corners_px: number[][];
  rotation: number[][];
  translation_mm: number[];
  reproj_error_px2: number;
}

export interface BoundaryLoopDto {
  closed: boolean;
  vertices: number[];
}

export interface ReportDto {
  watertight: boolean;
  boundary_loop_count: number;
  boundary_loops: BoundaryLoopDto[];
  nonmanifold_edge_count: number;
  component_count: number;
  component_separation_mm: number | null;
  degenerate_face_indices: number[];
  signed_volume_mm3: number;
  orientation_inverted: boolean;
  orientation_consistent: boolean;
  normals_absent: boolean;
  max_normal_deviation_deg: number | null;
  connectivity: string;
  alignment_metric: string;
  bbox_min_mm: number[];
  bbox_max_mm: number[];
}

export interface MeshDto {
  name: string;
  vertices: number[][];
  faces: number[][];
}

export interface SessionCreatedDto {
  session_id: string;
  state: SessionStateDto;
}

export interface FrameResponseDto {
  detection: DetectionDto | null;
  state: SessionStateDto;
}

export interface ModelUploadDto {
  state: SessionStateDto;
  report: ReportDto;
  mesh: MeshDto;
}

export interface MeshWithReportDto {
  mesh: MeshDto | null;
  report: ReportDto | null;
}

/** Session events as the service accepts and replays them. */
export interface EventDto {
  type: string;
  name?: string;
  category?: string;
  sign?: number;
  detection?: { yaw_rad: number } | null;
}
