"""Bilinear sampling in continuous image coordinates."""

from __future__ import annotations

import numpy as np


def bilinear_sample(values: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Sample a 2-D array at continuous (x, y) positions.

    Pixel (ix, iy) holds the value at (ix + 0.5, iy + 0.5); positions in
    between are blended from the four surrounding pixels, and positions
    past the outermost pixel centers clamp to the edge.
    """
    values = np.asarray(values, dtype=np.float64)
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    h, w = values.shape

    fx = np.clip(pts[:, 0] - 0.5, 0.0, w - 1.0)
    fy = np.clip(pts[:, 1] - 0.5, 0.0, h - 1.0)
    x0 = np.minimum(fx.astype(np.int64), w - 2) if w > 1 else np.zeros(len(fx), np.int64)
    y0 = np.minimum(fy.astype(np.int64), h - 2) if h > 1 else np.zeros(len(fy), np.int64)
    tx = fx - x0
    ty = fy - y0
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)

    v00 = values[y0, x0]
    v01 = values[y0, x1]
    v10 = values[y1, x0]
    v11 = values[y1, x1]
    top = v00 * (1.0 - tx) + v01 * tx
    bot = v10 * (1.0 - tx) + v11 * tx
    return top * (1.0 - ty) + bot * ty
