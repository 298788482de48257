"""Marker interior patterns: training, sampling, and matching.

A marker is a black square border of configurable relative width around
an n x n grayscale cell grid. Matching is normalized cross correlation
of zero-mean grids over the four 90 degree rotations, mapped to
confidence = (1 + ncc) / 2 so the score lives in [0, 1].

Pattern files are a small text format:

    ARPAT 1
    16 0.25
    <16 rows of 16 integers 0..255>
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import MeshLensError
from ..image import Frame
from .homography import Homography
from .interp import bilinear_sample

DEFAULT_GRID = 16
DEFAULT_BORDER_FRACTION = 0.25
DEFAULT_MATCH_THRESHOLD = 0.75


class PatternError(MeshLensError):
    pass


class TooSmall(PatternError):
    """Training image has fewer than 2 pixels per pattern cell."""


class OutOfFrame(MeshLensError):
    """A sample position maps outside the frame."""


class NoMatch(MeshLensError):
    """Best rotation scored below the match threshold."""


@dataclass
class MarkerPattern:
    grid: np.ndarray  # (n, n) uint8, row 0 at the top of the marker
    border_fraction: float = DEFAULT_BORDER_FRACTION

    def __post_init__(self):
        self.grid = np.ascontiguousarray(self.grid, dtype=np.uint8)
        n = self.grid.shape[0]
        if self.grid.ndim != 2 or self.grid.shape != (n, n) or n < 4:
            raise ValueError("pattern grid must be square, at least 4x4")
        if not 0.0 < self.border_fraction < 0.5:
            raise ValueError("border fraction must be in (0, 0.5)")

    @property
    def size(self) -> int:
        return self.grid.shape[0]


@dataclass
class MatchResult:
    confidence: float
    rotation_index: int  # number of 90 degree steps relating sample to pattern


def train_pattern(
    frame: Frame,
    n: int = DEFAULT_GRID,
    border_fraction: float = DEFAULT_BORDER_FRACTION,
) -> MarkerPattern:
    """Average an axis-aligned marker photo down to its n x n cell grid.

    The frame must show the full marker, border included, filling the
    image. Each interior cell becomes the mean of the pixels whose
    centers fall inside it, rounded to the nearest integer.
    """
    h, w = frame.height, frame.width
    if w < 2 * n or h < 2 * n:
        raise TooSmall(f"need at least {2 * n}px per side to train a {n}x{n} pattern")

    x0, x1 = border_fraction * w, (1.0 - border_fraction) * w
    y0, y1 = border_fraction * h, (1.0 - border_fraction) * h
    col_cell = np.floor((np.arange(w) + 0.5 - x0) / ((x1 - x0) / n)).astype(np.int64)
    row_cell = np.floor((np.arange(h) + 0.5 - y0) / ((y1 - y0) / n)).astype(np.int64)

    cols_ok = (col_cell >= 0) & (col_cell < n)
    rows_ok = (row_cell >= 0) & (row_cell < n)
    sub = frame.pixels[np.ix_(rows_ok, cols_ok)].astype(np.float64)
    rows = row_cell[rows_ok]
    cols = col_cell[cols_ok]

    sums = np.zeros((n, n))
    counts = np.zeros((n, n))
    np.add.at(sums, (rows[:, None], cols[None, :]), sub)
    np.add.at(counts, (rows[:, None], cols[None, :]), 1.0)
    if np.any(counts == 0):
        raise TooSmall("some pattern cells cover no pixel centers")
    grid = np.clip(np.rint(sums / counts), 0, 255).astype(np.uint8)
    return MarkerPattern(grid, border_fraction)


def interior_homography(outer: Homography, border_fraction: float) -> Homography:
    """Restrict a unit-square-to-image homography to the interior cell area.

    `outer` maps the unit square over the whole marker including the
    border; the returned homography maps the unit square over just the
    pattern cells.
    """
    b = border_fraction
    shrink = np.array([[1.0 - 2 * b, 0.0, b], [0.0, 1.0 - 2 * b, b], [0.0, 0.0, 1.0]])
    mat = outer.matrix @ shrink
    return Homography(mat / mat[2, 2])


def sample_grid(frame: Frame, interior: Homography, n: int = DEFAULT_GRID) -> np.ndarray:
    """Sample the n x n cell centers through a unit-square homography.

    Returns float64 luminances. Raises OutOfFrame when any cell center
    maps outside the frame rectangle.
    """
    centers = (np.arange(n) + 0.5) / n
    u, v = np.meshgrid(centers, centers)  # v indexes rows (marker y)
    pts = np.column_stack([u.ravel(), v.ravel()])
    mapped = interior.apply(pts)
    if (
        mapped[:, 0].min() < 0.0
        or mapped[:, 0].max() > frame.width
        or mapped[:, 1].min() < 0.0
        or mapped[:, 1].max() > frame.height
    ):
        raise OutOfFrame("pattern cell center maps outside the frame")
    return bilinear_sample(frame.pixels, mapped).reshape(n, n)


def _ncc(a: np.ndarray, b: np.ndarray) -> float:
    az = a - a.mean()
    bz = b - b.mean()
    denom = np.linalg.norm(az) * np.linalg.norm(bz)
    if denom == 0.0:
        return 0.0
    return float(np.dot(az.ravel(), bz.ravel()) / denom)


def match_pattern(
    samples: np.ndarray,
    pattern: MarkerPattern,
    threshold: float = DEFAULT_MATCH_THRESHOLD,
) -> MatchResult:
    """Best rotation of `pattern` explaining `samples`.

    rotation_index k means `samples` looks like np.rot90(grid, k). Raises
    NoMatch when even the best rotation scores below `threshold`.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.shape != pattern.grid.shape:
        raise ValueError("sample grid and pattern have different sizes")
    ref = pattern.grid.astype(np.float64)
    best = MatchResult(-1.0, 0)
    for k in range(4):
        conf = 0.5 * (1.0 + _ncc(samples, np.rot90(ref, k)))
        if conf > best.confidence:
            best = MatchResult(conf, k)
    if best.confidence < threshold:
        raise NoMatch(f"best confidence {best.confidence:.3f} below {threshold}")
    return best


def pattern_to_text(pattern: MarkerPattern) -> str:
    lines = ["ARPAT 1", f"{pattern.size} {pattern.border_fraction!r}"]
    for row in pattern.grid:
        lines.append(" ".join(str(int(v)) for v in row))
    return "\n".join(lines) + "\n"


def parse_pattern_text(text: str) -> MarkerPattern:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].split() != ["ARPAT", "1"]:
        raise PatternError("not an ARPAT version 1 file")
    try:
        n_str, bf_str = lines[1].split()
        n, bf = int(n_str), float(bf_str)
        rows = [[int(v) for v in ln.split()] for ln in lines[2 : 2 + n]]
    except (IndexError, ValueError) as exc:
        raise PatternError(f"malformed pattern file: {exc}") from None
    if len(rows) != n or any(len(r) != n for r in rows):
        raise PatternError("pattern body does not match declared size")
    if any(v < 0 or v > 255 for r in rows for v in r):
        raise PatternError("cell values must be 0..255")
    return MarkerPattern(np.array(rows, dtype=np.uint8), bf)


# Blocky F glyph: asymmetric under every nonzero rotation, and its
# rotations stay nearly uncorrelated, so the match cannot lock onto the
# wrong orientation. Each glyph cell spans 4x4 pattern cells, keeping the
# features legible at small marker scales.
_GLYPH = np.array(
    [
        [1, 1, 1, 1],
        [1, 0, 0, 0],
        [1, 1, 1, 0],
        [1, 0, 0, 0],
    ],
    dtype=np.uint8,
)


def reference_pattern() -> MarkerPattern:
    grid = np.where(np.kron(_GLYPH, np.ones((4, 4), dtype=np.uint8)) > 0, 0, 255)
    return MarkerPattern(grid.astype(np.uint8), DEFAULT_BORDER_FRACTION)


def render_marker(pattern: MarkerPattern, size_px: int = 256) -> Frame:
    """Axis-aligned marker bitmap: black border around the cell grid."""
    n = pattern.size
    img = np.zeros((size_px, size_px), dtype=np.uint8)
    b = pattern.border_fraction
    lo, hi = b * size_px, (1.0 - b) * size_px
    coords = np.arange(size_px) + 0.5
    cell = np.floor((coords - lo) / ((hi - lo) / n)).astype(np.int64)
    ok = (cell >= 0) & (cell < n)
    inner = np.ix_(ok, ok)
    img[inner] = pattern.grid[np.ix_(cell[ok], cell[ok])]
    return Frame(img)


def reference_marker_frame(size_px: int = 256) -> Frame:
    return render_marker(reference_pattern(), size_px)
