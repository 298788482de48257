"""Software rendering for the overlay: projection, z-buffered flat
shading, compositing onto camera frames, and synthetic marker views for
closing the loop in tests.

Conventions shared with the vision stack: camera x right, y down,
z forward; continuous pixel coordinates with pixel (ix, iy) centered at
(ix + 0.5, iy + 0.5). Faces with any vertex nearer than the near plane
are dropped whole rather than clipped geometrically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analysis import ModelTransform
from .errors import MeshLensError
from .image import Frame
from .stl import IndexedMesh
from .vision.camera import CameraIntrinsics
from .vision.interp import bilinear_sample
from .vision.pattern import MarkerPattern
from .vision.pose import Pose, marker_corners_mm, project_points_cam

NEAR_PLANE_MM = 1.0
DEFAULT_FILL_COLOR = (90, 200, 120)
DEFAULT_EDGE_COLOR = (255, 230, 70)
EDGE_DEPTH_BIAS = 1.001  # edges pass the depth test within 0.1 percent


class OutsideFrustum(MeshLensError):
    """Requested marker placement is not fully visible."""


@dataclass
class RenderedImage:
    color: np.ndarray  # (h, w, 3) uint8
    depth: np.ndarray  # (h, w) float64, +inf where nothing was drawn

    @property
    def width(self) -> int:
        return self.color.shape[1]

    @property
    def height(self) -> int:
        return self.color.shape[0]

    def coverage(self) -> np.ndarray:
        return np.isfinite(self.depth)


def transform_to_camera(
    points: np.ndarray,
    model: ModelTransform | None,
    pose: Pose,
    center: np.ndarray | None = None,
) -> np.ndarray:
    """Model space -> camera space millimeters."""
    pts = np.asarray(points, dtype=np.float64)
    if model is not None:
        c = np.zeros(3) if center is None else np.asarray(center, dtype=np.float64)
        pts = model.apply(pts, c)
    return pts @ pose.rotation.T + pose.translation


def project_points(
    points: np.ndarray,
    model: ModelTransform | None,
    pose: Pose,
    intrinsics: CameraIntrinsics,
    center: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Project model-space points to (u, v, z_mm) plus a clipped mask.

    Clipped points (depth < 1mm) get NaN pixel coordinates but keep
    their depth, so callers can still reason about where they went.
    """
    cam = transform_to_camera(points, model, pose, center)
    clipped = cam[:, 2] < NEAR_PLANE_MM
    uvz = np.empty((len(cam), 3))
    uvz[:, 2] = cam[:, 2]
    safe = np.where(clipped, np.nan, cam[:, 2])
    uvz[:, 0] = intrinsics.fx * cam[:, 0] / safe + intrinsics.cx
    uvz[:, 1] = intrinsics.fy * cam[:, 1] / safe + intrinsics.cy
    return uvz, clipped


def rasterize(
    mesh: IndexedMesh,
    model: ModelTransform | None,
    pose: Pose,
    intrinsics: CameraIntrinsics,
    size: tuple[int, int],
    color: tuple[int, int, int] = DEFAULT_FILL_COLOR,
) -> RenderedImage:
    """Flat-shaded z-buffer render of a mesh under the given pose.

    Deterministic: faces are visited in index order and the depth test
    is strict, so ties resolve to the earlier face.
    """
    w, h = size
    lo, hi = mesh.bbox()
    center = 0.5 * (lo + hi)
    cam = transform_to_camera(mesh.vertices, model, pose, center)

    depth = np.full((h, w), np.inf)
    out = np.zeros((h, w, 3), dtype=np.uint8)
    base = np.array(color, dtype=np.float64)

    tri_cam = cam[mesh.faces]  # (f, 3, 3)
    keep = np.all(tri_cam[:, :, 2] >= NEAR_PLANE_MM, axis=1)

    for fi in np.flatnonzero(keep):
        p = tri_cam[fi]
        uv = project_points_cam(p, intrinsics)
        x0 = max(int(np.floor(uv[:, 0].min() - 0.5)), 0)
        x1 = min(int(np.ceil(uv[:, 0].max() - 0.5)), w - 1)
        y0 = max(int(np.floor(uv[:, 1].min() - 0.5)), 0)
        y1 = min(int(np.ceil(uv[:, 1].max() - 0.5)), h - 1)
        if x1 < x0 or y1 < y0:
            continue

        a, b, c = uv
        area2 = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        if area2 == 0.0:
            continue

        xs = np.arange(x0, x1 + 1) + 0.5
        ys = np.arange(y0, y1 + 1) + 0.5
        px, py = np.meshgrid(xs, ys)
        w0 = ((c[0] - b[0]) * (py - b[1]) - (c[1] - b[1]) * (px - b[0])) / area2
        w1 = ((a[0] - c[0]) * (py - c[1]) - (a[1] - c[1]) * (px - c[0])) / area2
        w2 = 1.0 - w0 - w1
        inside = (w0 >= 0) & (w1 >= 0) & (w2 >= 0)
        if not inside.any():
            continue

        z = w0 * p[0, 2] + w1 * p[1, 2] + w2 * p[2, 2]
        normal = np.cross(p[1] - p[0], p[2] - p[0])
        norm = np.linalg.norm(normal)
        if norm == 0.0:
            continue
        lum = 0.2 + 0.8 * max(0.0, -normal[2] / norm)
        shade = np.clip(np.rint(lum * base), 0, 255).astype(np.uint8)

        tile = depth[y0 : y1 + 1, x0 : x1 + 1]
        win = inside & (z < tile)
        tile[win] = z[win]
        out[y0 : y1 + 1, x0 : x1 + 1][win] = shade
    return RenderedImage(out, depth)


def mesh_edge_segments(
    mesh: IndexedMesh,
    model: ModelTransform | None,
    pose: Pose,
    intrinsics: CameraIntrinsics,
) -> np.ndarray:
    """Unique mesh edges projected to (u, v, z), clipped edges dropped.

    Returns an (m, 2, 3) array suitable for composite_overlay.
    """
    faces = mesh.faces
    edges = np.vstack([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    edges = np.unique(np.sort(edges, axis=1), axis=0)

    lo, hi = mesh.bbox()
    center = 0.5 * (lo + hi)
    uvz, clipped = project_points(mesh.vertices, model, pose, intrinsics, center)
    ok = ~(clipped[edges[:, 0]] | clipped[edges[:, 1]])
    return np.stack([uvz[edges[ok, 0]], uvz[edges[ok, 1]]], axis=1)


def composite_overlay(
    frame: Frame,
    render: RenderedImage,
    wireframe: bool = False,
    edges: np.ndarray | None = None,
    edge_color: tuple[int, int, int] = DEFAULT_EDGE_COLOR,
) -> np.ndarray:
    """Camera frame with the render on top; returns (h, w, 3) uint8.

    Wireframe edges are drawn depth-tested against the render's own
    z-buffer with a small bias so edges lying on surfaces stay visible.
    """
    if (render.height, render.width) != (frame.height, frame.width):
        raise ValueError("render and frame sizes differ")
    out = np.repeat(frame.pixels[:, :, None], 3, axis=2)
    covered = render.coverage()
    out[covered] = render.color[covered]

    if wireframe and edges is not None and len(edges):
        color = np.array(edge_color, dtype=np.uint8)
        h, w = frame.height, frame.width
        for p0, p1 in edges:
            du, dv = p1[0] - p0[0], p1[1] - p0[1]
            steps = max(int(np.ceil(max(abs(du), abs(dv)))), 1)
            ts = np.linspace(0.0, 1.0, steps + 1)
            us = p0[0] + ts * du
            vs = p0[1] + ts * dv
            zs = p0[2] + ts * (p1[2] - p0[2])
            ix = np.floor(us).astype(np.int64)
            iy = np.floor(vs).astype(np.int64)
            ok = (ix >= 0) & (ix < w) & (iy >= 0) & (iy < h)
            ix, iy, zs = ix[ok], iy[ok], zs[ok]
            visible = zs <= render.depth[iy, ix] * EDGE_DEPTH_BIAS
            out[iy[visible], ix[visible]] = color
    return out


def synthesize_marker_frame(
    pattern: MarkerPattern,
    pose: Pose,
    intrinsics: CameraIntrinsics,
    size: tuple[int, int],
    marker_side: float,
    background: int = 200,
) -> Frame:
    """Render the marker under a pose onto a plain background.

    2x2 supersampling per pixel; the marker plane is sampled through the
    inverse of the plane homography, border painted black and the
    interior bilinearly interpolated from the pattern grid.
    """
    w, h = size
    corners_cam = marker_corners_mm(marker_side) @ pose.rotation.T + pose.translation
    if np.any(corners_cam[:, 2] < NEAR_PLANE_MM):
        raise OutsideFrustum("marker crosses the near plane")
    uv = project_points_cam(corners_cam, intrinsics)
    if (
        uv[:, 0].min() < 0.0
        or uv[:, 0].max() > w
        or uv[:, 1].min() < 0.0
        or uv[:, 1].max() > h
    ):
        raise OutsideFrustum("marker corners project outside the frame")

    plane_to_px = intrinsics.matrix @ np.column_stack(
        [pose.rotation[:, 0], pose.rotation[:, 1], pose.translation]
    )
    px_to_plane = np.linalg.inv(plane_to_px)

    xs = np.arange(w) + 0.5
    ys = np.arange(h) + 0.5
    half = marker_side / 2.0
    inner = marker_side * (1.0 - 2.0 * pattern.border_fraction)
    grid = pattern.grid.astype(np.float64)
    n = pattern.size

    acc = np.zeros((h, w))
    for dx, dy in ((-0.25, -0.25), (0.25, -0.25), (-0.25, 0.25), (0.25, 0.25)):
        px, py = np.meshgrid(xs + dx, ys + dy)
        hom = np.stack([px, py, np.ones_like(px)], axis=-1) @ px_to_plane.T
        back = hom[..., 2] <= 0
        denom = np.where(back, 1.0, hom[..., 2])
        mx = hom[..., 0] / denom
        my = hom[..., 1] / denom

        on_marker = (np.abs(mx) <= half) & (np.abs(my) <= half) & ~back
        interior = (np.abs(mx) <= inner / 2.0) & (np.abs(my) <= inner / 2.0) & ~back

        value = np.full((h, w), float(background))
        value[on_marker] = 0.0
        if interior.any():
            gx = (mx[interior] + inner / 2.0) / inner * n
            gy = (my[interior] + inner / 2.0) / inner * n
            value[interior] = bilinear_sample(grid, np.column_stack([gx, gy]))
        acc += value
    return Frame(np.clip(np.rint(acc / 4.0), 0, 255).astype(np.uint8))
