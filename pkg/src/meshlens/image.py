"""8-bit grayscale frames and netpbm (PGM/PPM) serialization.

Continuous image coordinates put the center of pixel (ix, iy) at
(ix + 0.5, iy + 0.5); every module that exchanges pixel positions uses
this convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MeshLensError

MIN_FRAME_SIDE = 16

# Standard luma weights; the browser client must use the same ones so the
# CLI and UI see identical pixels.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


class NetpbmError(MeshLensError):
    pass


@dataclass
class Frame:
    """Row-major 8-bit luminance image."""

    pixels: np.ndarray  # (h, w) uint8

    def __post_init__(self):
        self.pixels = np.ascontiguousarray(self.pixels)
        if self.pixels.dtype != np.uint8:
            raise ValueError("frame data must be uint8")
        if self.pixels.ndim != 2:
            raise ValueError("frame data must be 2-D")
        h, w = self.pixels.shape
        if h < MIN_FRAME_SIDE or w < MIN_FRAME_SIDE:
            raise ValueError(f"frame must be at least {MIN_FRAME_SIDE}px per side")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


def rgb_to_gray(rgb: np.ndarray) -> np.ndarray:
    """Convert (h, w, 3) uint8 RGB to uint8 luma."""
    weights = np.array(LUMA_WEIGHTS)
    return np.clip(np.rint(rgb.astype(np.float64) @ weights), 0, 255).astype(np.uint8)


def _read_header_tokens(data: bytes, count: int) -> tuple[list[int], int]:
    """Read `count` whitespace-separated integers, skipping '#' comments.

    Returns the values and the offset just past the single whitespace byte
    that terminates the last token.
    """
    values: list[int] = []
    pos = 0
    while len(values) < count:
        if pos >= len(data):
            raise NetpbmError("truncated header")
        ch = data[pos : pos + 1]
        if ch == b"#":
            while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif ch.isspace():
            pos += 1
        else:
            start = pos
            while pos < len(data) and not data[pos : pos + 1].isspace():
                pos += 1
            token = data[start:pos]
            try:
                values.append(int(token))
            except ValueError:
                raise NetpbmError(f"bad header token {token!r}") from None
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise NetpbmError("missing whitespace after header")
    return values, pos + 1


def read_pgm(data: bytes) -> Frame:
    """Parse binary PGM (P5, maxval 255)."""
    if data[:2] != b"P5":
        raise NetpbmError("not a P5 PGM")
    (width, height, maxval), offset = _read_header_tokens(data[2:], 3)
    offset += 2
    if maxval != 255:
        raise NetpbmError(f"unsupported maxval {maxval}, only 255")
    need = width * height
    raster = data[offset : offset + need]
    if len(raster) != need:
        raise NetpbmError(f"raster has {len(raster)} bytes, expected {need}")
    return Frame(np.frombuffer(raster, dtype=np.uint8).reshape(height, width).copy())


def write_pgm(frame: Frame) -> bytes:
    header = f"P5\n{frame.width} {frame.height}\n255\n".encode("ascii")
    return header + frame.pixels.tobytes()


def read_ppm(data: bytes) -> np.ndarray:
    """Parse binary PPM (P6, maxval 255) into (h, w, 3) uint8."""
    if data[:2] != b"P6":
        raise NetpbmError("not a P6 PPM")
    (width, height, maxval), offset = _read_header_tokens(data[2:], 3)
    offset += 2
    if maxval != 255:
        raise NetpbmError(f"unsupported maxval {maxval}, only 255")
    need = width * height * 3
    raster = data[offset : offset + need]
    if len(raster) != need:
        raise NetpbmError(f"raster has {len(raster)} bytes, expected {need}")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width, 3).copy()


def write_ppm(rgb: np.ndarray) -> bytes:
    rgb = np.ascontiguousarray(rgb, dtype=np.uint8)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError("expected (h, w, 3) RGB array")
    h, w = rgb.shape[:2]
    return f"P6\n{w} {h}\n255\n".encode("ascii") + rgb.tobytes()
