"""Plane-to-plane projective mapping from four point pairs.

The classic direct linear transform: stack the incidence constraints,
take the null space by SVD, denormalize. Points are preconditioned
(centroid to the origin, mean distance sqrt(2)) so the system stays well
conditioned even when the pixel coordinates are in the hundreds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import MeshLensError

_DET_FLOOR = 1e-12


class DegenerateConfiguration(MeshLensError):
    """Three of the four points are (nearly) collinear."""


@dataclass
class Homography:
    matrix: np.ndarray  # (3, 3), matrix[2, 2] == 1

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.float64)
        if self.matrix.shape != (3, 3):
            raise ValueError("homography matrix must be 3x3")
        if abs(np.linalg.det(self.matrix)) <= _DET_FLOOR:
            raise DegenerateConfiguration("homography is numerically singular")

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Map (n, 2) points through the homography."""
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        ones = np.ones((pts.shape[0], 1))
        mapped = np.hstack([pts, ones]) @ self.matrix.T
        return mapped[:, :2] / mapped[:, 2:3]

    def inverse(self) -> "Homography":
        inv = np.linalg.inv(self.matrix)
        return Homography(inv / inv[2, 2])


def _collinear_triple(points: np.ndarray) -> bool:
    span = points.max(axis=0) - points.min(axis=0)
    scale = max(float(span.max()), 1e-30)
    for skip in range(4):
        a, b, c = points[[i for i in range(4) if i != skip][:3]]
        area2 = abs((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
        if area2 <= 1e-10 * scale * scale:
            return True
    return False


def _preconditioner(points: np.ndarray) -> np.ndarray:
    centroid = points.mean(axis=0)
    spread = np.mean(np.linalg.norm(points - centroid, axis=1))
    s = np.sqrt(2.0) / max(spread, 1e-30)
    return np.array(
        [[s, 0.0, -s * centroid[0]], [0.0, s, -s * centroid[1]], [0.0, 0.0, 1.0]]
    )


def homography_dlt(src: np.ndarray, dst: np.ndarray) -> Homography:
    """Exact homography taking the four src points onto the four dst points."""
    src = np.asarray(src, dtype=np.float64).reshape(4, 2)
    dst = np.asarray(dst, dtype=np.float64).reshape(4, 2)
    if _collinear_triple(src) or _collinear_triple(dst):
        raise DegenerateConfiguration("three correspondence points are collinear")

    t_src = _preconditioner(src)
    t_dst = _preconditioner(dst)
    s = (np.hstack([src, np.ones((4, 1))]) @ t_src.T)[:, :2]
    d = (np.hstack([dst, np.ones((4, 1))]) @ t_dst.T)[:, :2]

    rows = []
    for (x, y), (u, v) in zip(s, d):
        rows.append([-x, -y, -1.0, 0.0, 0.0, 0.0, u * x, u * y, u])
        rows.append([0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v])
    _, _, vt = np.linalg.svd(np.array(rows))
    h_norm = vt[-1].reshape(3, 3)

    h = np.linalg.inv(t_dst) @ h_norm @ t_src
    if abs(h[2, 2]) < 1e-15:
        raise DegenerateConfiguration("homography maps a finite point to infinity")
    return Homography(h / h[2, 2])
