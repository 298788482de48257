"""Single-marker detection: frame in, pose and identity out.

The stages mirror the classic square-marker recipe: adaptive threshold,
quad candidates, perspective sampling of the interior, rotationally
searched pattern match, then pose recovery from the rotation-anchored
corners and a Gauss-Newton polish.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..image import Frame
from .camera import CameraIntrinsics
from .homography import DegenerateConfiguration, homography_dlt
from .pattern import (
    DEFAULT_MATCH_THRESHOLD,
    MarkerPattern,
    NoMatch,
    OutOfFrame,
    interior_homography,
    match_pattern,
    sample_grid,
)
from .pose import BehindCamera, Diverged, Pose, marker_corners_mm, pose_from_homography, refine_pose
from .quads import DEFAULT_MIN_AREA, extract_quads, refine_quad
from .threshold import DEFAULT_OFFSET, DEFAULT_WINDOW, adaptive_threshold

UNIT_SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


@dataclass
class DetectConfig:
    window: int = DEFAULT_WINDOW
    offset: float = DEFAULT_OFFSET
    min_area: float = DEFAULT_MIN_AREA
    match_threshold: float = DEFAULT_MATCH_THRESHOLD
    refine_corners: bool = True


@dataclass
class Detection:
    pose: Pose
    confidence: float
    rotation_index: int
    corners: np.ndarray  # (4, 2) px, anchored: corners[0] is the pattern's top left
    reproj_error: float

    @property
    def yaw(self) -> float:
        return self.pose.yaw


def _anchor_corners(corners: np.ndarray, rotation_index: int) -> np.ndarray:
    """Reorder screen corners so index 0 is the pattern's own top left.

    A sample grid that equals rot90(pattern, k) means the pattern is spun
    within the quad; rolling the corner list by k realigns it.
    """
    return np.roll(corners, rotation_index, axis=0)


def detect_marker(
    frame: Frame,
    pattern: MarkerPattern,
    intrinsics: CameraIntrinsics,
    marker_side: float,
    config: DetectConfig | None = None,
) -> Detection | None:
    """Find the best matching marker in a frame, or None.

    Every convex quad candidate is sampled and scored against all four
    pattern rotations; the highest confidence wins and is accepted only
    if it clears the match threshold.
    """
    cfg = config or DetectConfig()
    mask = adaptive_threshold(frame, cfg.window, cfg.offset)
    quads = extract_quads(mask, cfg.min_area)
    if not quads:
        return None

    scored = []
    for quad in quads:
        if cfg.refine_corners:
            quad = refine_quad(frame, quad)
        try:
            outer = homography_dlt(UNIT_SQUARE, quad.corners)
            samples = sample_grid(
                frame, interior_homography(outer, pattern.border_fraction), pattern.size
            )
            match = match_pattern(samples, pattern, threshold=0.0)
        except (DegenerateConfiguration, OutOfFrame, NoMatch):
            continue
        scored.append((match.confidence, match.rotation_index, quad))
    if not scored:
        return None

    confidence, rotation_index, quad = max(scored, key=lambda s: s[0])
    if confidence < cfg.match_threshold:
        return None

    anchored = _anchor_corners(quad.corners, rotation_index)
    try:
        h = homography_dlt(marker_corners_mm(marker_side)[:, :2], anchored)
        pose0 = pose_from_homography(h, intrinsics, marker_side)
        pose, err = refine_pose(pose0, anchored, intrinsics, marker_side)
    except (DegenerateConfiguration, BehindCamera, Diverged):
        return None
    return Detection(pose, confidence, rotation_index, anchored, err)
