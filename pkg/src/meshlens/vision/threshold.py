"""Adaptive binarization for marker frames.

A global threshold fails as soon as the light across the scene is uneven,
so each pixel is compared against the mean of a square window around it.
The window mean comes from an integral image, which keeps the cost
independent of the window size.
"""

from __future__ import annotations

import numpy as np

from ..image import Frame

DEFAULT_WINDOW = 31
DEFAULT_OFFSET = 7.0


def local_mean(pixels: np.ndarray, window: int = DEFAULT_WINDOW) -> np.ndarray:
    """Mean over a centered window x window box, clamped at the borders.

    Near the edges the box is cropped to the image, and the mean is taken
    over the pixels actually covered.
    """
    if window < 3 or window % 2 == 0:
        raise ValueError("window must be an odd integer >= 3")
    values = np.asarray(pixels, dtype=np.float64)
    h, w = values.shape
    integral = np.zeros((h + 1, w + 1))
    np.cumsum(np.cumsum(values, axis=0), axis=1, out=integral[1:, 1:])

    r = window // 2
    y0 = np.clip(np.arange(h) - r, 0, None)
    y1 = np.clip(np.arange(h) + r + 1, None, h)
    x0 = np.clip(np.arange(w) - r, 0, None)
    x1 = np.clip(np.arange(w) + r + 1, None, w)

    sums = (
        integral[y1[:, None], x1[None, :]]
        - integral[y0[:, None], x1[None, :]]
        - integral[y1[:, None], x0[None, :]]
        + integral[y0[:, None], x0[None, :]]
    )
    counts = (y1 - y0)[:, None] * (x1 - x0)[None, :]
    return sums / counts


def adaptive_threshold(
    frame: Frame, window: int = DEFAULT_WINDOW, offset: float = DEFAULT_OFFSET
) -> np.ndarray:
    """Boolean foreground mask; True where the pixel is locally dark.

    A pixel is foreground when its value drops below the window mean by
    more than `offset`. Scaling both the image and the offset by a common
    gain leaves the mask unchanged, which is what makes the marker border
    detectable across exposure changes.
    """
    means = local_mean(frame.pixels, window)
    return frame.pixels.astype(np.float64) < means - offset
