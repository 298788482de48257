from .camera import CameraIntrinsics, IntrinsicsError, intrinsics_from_dict
from .detect import DetectConfig, Detection, detect_marker
from .homography import DegenerateConfiguration, Homography, homography_dlt
from .pattern import (
    MarkerPattern,
    MatchResult,
    NoMatch,
    OutOfFrame,
    match_pattern,
    parse_pattern_text,
    pattern_to_text,
    reference_marker_frame,
    reference_pattern,
    sample_grid,
    train_pattern,
)
from .pose import BehindCamera, Diverged, Pose, pose_from_homography, refine_pose, yaw_of_rotation
from .quads import QuadCandidate, extract_quads, refine_quad
from .threshold import adaptive_threshold, local_mean

__all__ = [
    "BehindCamera",
    "CameraIntrinsics",
    "DegenerateConfiguration",
    "DetectConfig",
    "Detection",
    "Diverged",
    "Homography",
    "IntrinsicsError",
    "MarkerPattern",
    "MatchResult",
    "NoMatch",
    "OutOfFrame",
    "Pose",
    "QuadCandidate",
    "adaptive_threshold",
    "detect_marker",
    "extract_quads",
    "homography_dlt",
    "intrinsics_from_dict",
    "local_mean",
    "match_pattern",
    "parse_pattern_text",
    "pattern_to_text",
    "pose_from_homography",
    "reference_marker_frame",
    "reference_pattern",
    "refine_pose",
    "refine_quad",
    "sample_grid",
    "train_pattern",
    "yaw_of_rotation",
]
