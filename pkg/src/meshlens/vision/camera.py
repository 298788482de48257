"""Pinhole camera intrinsics.

Camera frame convention: x right, y down, z forward (right handed). A
point (x, y, z) in front of the camera projects to
u = fx * x / z + cx, v = fy * y / z + cy, in continuous pixel
coordinates where pixel (ix, iy) has its center at (ix + 0.5, iy + 0.5).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import MeshLensError

_DISTORTION_KEYS = ("k1", "k2", "k3", "p1", "p2")


class IntrinsicsError(MeshLensError):
    pass


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise IntrinsicsError("focal lengths must be positive")

    @property
    def matrix(self) -> np.ndarray:
        return np.array(
            [[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]]
        )

    def to_dict(self) -> dict:
        return {"fx": self.fx, "fy": self.fy, "cx": self.cx, "cy": self.cy}


def intrinsics_from_dict(data: dict) -> CameraIntrinsics:
    """Build intrinsics from a plain dict, e.g. parsed calibration JSON.

    Lens distortion is not modelled anywhere in the pipeline, so any
    nonzero distortion coefficient is an error rather than something to
    silently drop.
    """
    try:
        fx, fy = float(data["fx"]), float(data["fy"])
        cx, cy = float(data["cx"]), float(data["cy"])
    except (KeyError, TypeError, ValueError) as exc:
        raise IntrinsicsError(f"intrinsics need numeric fx, fy, cx, cy: {exc}") from None

    coeffs = [float(data.get(k, 0.0)) for k in _DISTORTION_KEYS]
    extra = data.get("distortion")
    if extra is not None:
        coeffs.extend(float(v) for v in extra)
    if any(c != 0.0 for c in coeffs):
        raise IntrinsicsError("nonzero lens distortion is not supported")
    return CameraIntrinsics(fx, fy, cx, cy)
