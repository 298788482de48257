"""Candidate marker quadrilaterals from a binary foreground mask.

Pipeline per connected region: trace the outer boundary (Moore
neighborhood walk), simplify the closed contour to a polygon
(Douglas-Peucker with a tolerance tied to the perimeter), keep convex
four-gons above the area floor.

Contours come out ordered clockwise on screen, which with y pointing
down is the positive-shoelace orientation. Corner 0 is the topmost
corner, ties broken toward the left, so the ordering is reproducible.

The traced corners sit on pixel centers and carry up to half a pixel of
quantization, which is too coarse for pose work at small marker scales.
`refine_quad` pulls each side onto the underlying intensity edge: sample
perpendicular luminance profiles along the side, locate the light/dark
midlevel crossing in each by linear interpolation, fit a line through
the crossings, and intersect neighboring lines to get the corners.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ..image import Frame
from .interp import bilinear_sample

DEFAULT_MIN_AREA = 400.0
RDP_PERIMETER_FRACTION = 0.02

# Moore neighborhood in (dx, dy), clockwise on screen starting west.
_DIRS = ((-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1))
_DIR_INDEX = {d: i for i, d in enumerate(_DIRS)}


@dataclass
class QuadCandidate:
    """Four corners, (4, 2) float64, positive shoelace, topmost first."""

    corners: np.ndarray

    def __post_init__(self):
        self.corners = np.asarray(self.corners, dtype=np.float64).reshape(4, 2)

    @property
    def area(self) -> float:
        return shoelace_area(self.corners)

    @property
    def perimeter(self) -> float:
        diffs = np.roll(self.corners, -1, axis=0) - self.corners
        return float(np.linalg.norm(diffs, axis=1).sum())


def shoelace_area(points: np.ndarray) -> float:
    x, y = points[:, 0], points[:, 1]
    return float(0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _cross2(a, b):
    """z component of the 2-D cross product, elementwise."""
    a = np.asarray(a)
    b = np.asarray(b)
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def trace_boundary(labels: np.ndarray, label: int, start: tuple[int, int]) -> np.ndarray:
    """Outer boundary pixels of one labelled region, ordered.

    `start` must be the region's first pixel in row-major scan order
    (topmost row, leftmost within it), which guarantees the west and
    north neighbors are background.
    """
    h, w = labels.shape

    def fg(x, y):
        return 0 <= x < w and 0 <= y < h and labels[y, x] == label

    sx, sy = start
    contour = [(sx, sy)]
    cur, back = (sx, sy), (sx - 1, sy)
    first_step = None
    limit = 4 * h * w
    for _ in range(limit):
        i = _DIR_INDEX[(back[0] - cur[0], back[1] - cur[1])]
        nxt = None
        for step in range(1, 9):
            j = (i + step) % 8
            cand = (cur[0] + _DIRS[j][0], cur[1] + _DIRS[j][1])
            if fg(*cand):
                prev = (i + step - 1) % 8
                nxt = cand
                back = (cur[0] + _DIRS[prev][0], cur[1] + _DIRS[prev][1])
                break
        if nxt is None:
            break  # isolated pixel
        # stop when the walk's first edge repeats: we are back at the
        # start and about to revisit the same second pixel
        if cur == (sx, sy) and first_step is not None and nxt == first_step:
            break
        if first_step is None:
            first_step = nxt
        cur = nxt
        if cur != (sx, sy):
            contour.append(cur)
    return np.array(contour, dtype=np.int64)


def _rdp_keep(points: np.ndarray, eps: float) -> list[int]:
    """Indices kept by Douglas-Peucker on an open chain."""
    keep = {0, len(points) - 1}
    stack = [(0, len(points) - 1)]
    while stack:
        i0, i1 = stack.pop()
        if i1 - i0 < 2:
            continue
        a, b = points[i0], points[i1]
        seg = b - a
        seg_len = np.linalg.norm(seg)
        chunk = points[i0 + 1 : i1]
        if seg_len < 1e-12:
            dists = np.linalg.norm(chunk - a, axis=1)
        else:
            dists = np.abs(_cross2(seg, chunk - a)) / seg_len
        k = int(np.argmax(dists))
        if dists[k] > eps:
            split = i0 + 1 + k
            keep.add(split)
            stack.append((i0, split))
            stack.append((split, i1))
    return sorted(keep)


def simplify_closed(contour: np.ndarray, eps: float) -> np.ndarray:
    """Polygon vertices of a closed contour via split-anchor Douglas-Peucker.

    The two anchors must be genuine polygon corners or Douglas-Peucker can
    flatten a real corner into a chord. The point farthest from the
    centroid is always a corner of a convex shape, and the point farthest
    from that one is a corner too, so those two split the loop.
    """
    pts = contour.astype(np.float64)
    start = int(np.argmax(np.linalg.norm(pts - pts.mean(axis=0), axis=1)))
    pts = np.roll(pts, -start, axis=0)
    far = int(np.argmax(np.linalg.norm(pts - pts[0], axis=1)))
    if far == 0:
        return pts[:1]
    chain_a = pts[: far + 1]
    chain_b = np.vstack([pts[far:], pts[:1]])
    idx_a = _rdp_keep(chain_a, eps)[:-1]
    idx_b = _rdp_keep(chain_b, eps)[:-1]
    corners = np.vstack([chain_a[idx_a], chain_b[idx_b]])

    # The anchors are not guaranteed to be true polygon corners; drop any
    # vertex that is within tolerance of the line through its neighbors.
    changed = True
    while changed and len(corners) > 3:
        changed = False
        n = len(corners)
        for i in range(n):
            a, b, c = corners[(i - 1) % n], corners[i], corners[(i + 1) % n]
            seg = c - a
            seg_len = np.linalg.norm(seg)
            if seg_len < 1e-12:
                continue
            d = abs(_cross2(seg, b - a)) / seg_len
            if d <= eps:
                corners = np.delete(corners, i, axis=0)
                changed = True
                break
    return corners


def _is_convex(corners: np.ndarray) -> bool:
    crosses = []
    for i in range(4):
        a = corners[(i + 1) % 4] - corners[i]
        b = corners[(i + 2) % 4] - corners[(i + 1) % 4]
        crosses.append(_cross2(a, b))
    crosses = np.array(crosses)
    return bool(np.all(crosses > 0) or np.all(crosses < 0))


def _canonical_order(corners: np.ndarray) -> np.ndarray:
    if shoelace_area(corners) < 0:
        corners = corners[::-1]
    start = int(np.lexsort((corners[:, 0], corners[:, 1]))[0])
    return np.roll(corners, -start, axis=0)


def extract_quads(mask: np.ndarray, min_area: float = DEFAULT_MIN_AREA) -> list[QuadCandidate]:
    """Convex quadrilateral candidates from a boolean foreground mask."""
    labels, count = ndimage.label(mask, structure=np.ones((3, 3), dtype=np.int8))
    if count == 0:
        return []
    sizes = np.bincount(labels.ravel())
    flat = labels.ravel()
    order = np.argsort(flat, kind="stable")
    first_of = {}
    uniq, first_idx = np.unique(flat[order], return_index=True)
    for lab, fi in zip(uniq, first_idx):
        first_of[int(lab)] = int(order[fi])

    # A quad of min_area can present as a thin border ring, so the pixel
    # floor must stay well below the area floor.
    min_pixels = max(16, int(min_area * 0.1))
    w = mask.shape[1]

    quads = []
    for lab in range(1, count + 1):
        if sizes[lab] < min_pixels:
            continue
        start_flat = first_of[lab]
        start = (start_flat % w, start_flat // w)
        contour = trace_boundary(labels, lab, start)
        if len(contour) < 8:
            continue
        closed = np.vstack([contour, contour[:1]]).astype(np.float64)
        perimeter = float(np.linalg.norm(np.diff(closed, axis=0), axis=1).sum())
        corners = simplify_closed(contour, RDP_PERIMETER_FRACTION * perimeter)
        if len(corners) != 4:
            continue
        corners = corners + 0.5  # pixel index -> pixel center
        if not _is_convex(corners):
            continue
        if abs(shoelace_area(corners)) < min_area:
            continue
        quads.append(QuadCandidate(_canonical_order(corners)))
    return quads


def _side_line(frame: Frame, a: np.ndarray, b: np.ndarray, *, half_width: float,
               samples: int, trim: float) -> tuple[np.ndarray, float] | None:
    """Fit (normal, offset) for one quad side from subpixel edge crossings.

    Returns None when too few profiles produce a usable crossing, in
    which case the caller keeps the un-refined side.
    """
    d = b - a
    length = np.linalg.norm(d)
    if length < 8.0:
        return None
    outward = np.array([d[1], -d[0]]) / length

    ntaps = 2 * int(round(2 * half_width)) + 1  # half-pixel spacing
    taps = np.linspace(half_width, -half_width, ntaps)  # outside -> inside
    ts = np.linspace(trim, 1.0 - trim, samples)
    centers = a[None, :] + ts[:, None] * d[None, :]
    grid = centers[:, None, :] + taps[None, :, None] * outward[None, None, :]
    prof = bilinear_sample(frame.pixels, grid.reshape(-1, 2)).reshape(samples, len(taps))

    crossings = []
    for row, center in zip(prof, centers):
        outer = row[:3].mean()
        inner = row[-3:].mean()
        if outer - inner < 20.0:
            continue
        level = 0.5 * (outer + inner)
        best = None
        for j in range(len(taps) - 1):
            g0, g1 = row[j], row[j + 1]
            if g0 >= level > g1:
                s = taps[j] + (taps[j + 1] - taps[j]) * (g0 - level) / (g0 - g1)
                if best is None or abs(s) < abs(best):
                    best = s
        if best is not None:
            crossings.append(center + best * outward)
    if len(crossings) < max(8, samples // 3):
        return None

    pts = np.array(crossings)
    centroid = pts.mean(axis=0)
    _, _, vt = np.linalg.svd(pts - centroid)
    normal = vt[1]
    return normal, float(normal @ centroid)


def refine_quad(frame: Frame, quad: QuadCandidate, *, half_width: float = 6.0,
                samples: int = 24, trim: float = 0.12, passes: int = 2,
                max_shift: float = 15.0) -> QuadCandidate:
    """Subpixel version of a traced quad.

    Runs two passes: thresholding can erode an extreme corner by several
    pixels, which skews the chord the profiles are sampled along, so the
    first pass recovers the rough corner and the second tightens it.
    Sides that fail to produce a stable edge fit fall back to the input
    geometry, and any corner that ends up more than `max_shift` pixels
    from where it started is rejected in favor of the original.
    """
    corners = quad.corners
    for _ in range(passes):
        lines = []
        for k in range(4):
            a, b = corners[k], corners[(k + 1) % 4]
            fit = _side_line(frame, a, b, half_width=half_width, samples=samples, trim=trim)
            if fit is None:
                d = b - a
                n = np.array([d[1], -d[0]])
                n = n / np.linalg.norm(n)
                fit = (n, float(n @ a))
            lines.append(fit)

        refined = corners.copy()
        for k in range(4):
            n1, c1 = lines[(k - 1) % 4]
            n2, c2 = lines[k]
            mat = np.array([n1, n2])
            if abs(np.linalg.det(mat)) < 1e-9:
                continue
            p = np.linalg.solve(mat, np.array([c1, c2]))
            if np.linalg.norm(p - quad.corners[k]) <= max_shift:
                refined[k] = p
        corners = refined
    return QuadCandidate(_canonical_order(corners))
