"""Procedural meshes: demo catalog entries and fixture geometry for tests."""

from __future__ import annotations

import numpy as np

from .stl import IndexedMesh, SourceFormat, TriangleSoup

# Outward-oriented box triangulation over the 8 corners of [x0,x1]x[y0,y1]x[z0,z1],
# corner index = x_bit + 2*...: see _BOX_CORNERS.
_BOX_FACES = np.array(
    [
        (0, 2, 1), (0, 3, 2),  # bottom (-z)
        (4, 5, 6), (4, 6, 7),  # top (+z)
        (0, 1, 5), (0, 5, 4),  # front (-y)
        (3, 7, 6), (3, 6, 2),  # back (+y)
        (0, 4, 7), (0, 7, 3),  # left (-x)
        (1, 2, 6), (1, 6, 5),  # right (+x)
    ],
    dtype=np.int64,
)


def box(size=(1.0, 1.0, 1.0), origin=(0.0, 0.0, 0.0)) -> IndexedMesh:
    """Closed axis-aligned box with outward-oriented faces."""
    sx, sy, sz = size
    ox, oy, oz = origin
    corners = np.array(
        [
            (ox, oy, oz),
            (ox + sx, oy, oz),
            (ox + sx, oy + sy, oz),
            (ox, oy + sy, oz),
            (ox, oy, oz + sz),
            (ox + sx, oy, oz + sz),
            (ox + sx, oy + sy, oz + sz),
            (ox, oy + sy, oz + sz),
        ],
        dtype=np.float64,
    )
    return IndexedMesh(corners, _BOX_FACES.copy())


def unit_cube() -> IndexedMesh:
    return box()


def open_box(size=(1.0, 1.0, 1.0), origin=(0.0, 0.0, 0.0)) -> IndexedMesh:
    """Box with the bottom face's two triangles removed (a 4-edge gap)."""
    full = box(size, origin)
    return IndexedMesh(full.vertices, full.faces[2:])


def merge(*meshes: IndexedMesh) -> IndexedMesh:
    """Disjoint union; indices are offset, nothing is welded."""
    vertices = []
    faces = []
    offset = 0
    for m in meshes:
        vertices.append(m.vertices)
        faces.append(m.faces + offset)
        offset += len(m.vertices)
    return IndexedMesh(np.vstack(vertices), np.vstack(faces))


def two_shell_box(size=(20.0, 20.0, 20.0), gap: float = 0.5) -> IndexedMesh:
    """Two coaxial closed boxes separated by an axial gap, in one mesh.

    Stand-in for stacked-shape models that look like one piece but are
    disconnected shells.
    """
    sx, sy, sz = size
    lower = box(size, (0.0, 0.0, 0.0))
    upper = box(size, (0.0, 0.0, sz + gap))
    return merge(lower, upper)


def flipped(mesh: IndexedMesh) -> IndexedMesh:
    """Same geometry with every face winding reversed."""
    return IndexedMesh(mesh.vertices.copy(), mesh.faces[:, ::-1].copy())


def soup_from_mesh(mesh: IndexedMesh, normals: str = "computed") -> TriangleSoup:
    """Expand an indexed mesh into a triangle soup.

    normals: "computed" stores unit cross-product normals, "zero" stores
    zero vectors (exporters that omit normals).
    """
    tri = mesh.vertices[mesh.faces]
    if normals == "computed":
        n = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
        lengths = np.linalg.norm(n, axis=1)
        nz = lengths > 0
        n[nz] /= lengths[nz, None]
        n[~nz] = 0.0
    elif normals == "zero":
        n = np.zeros((len(tri), 3))
    else:
        raise ValueError(f"unknown normals mode {normals!r}")
    return TriangleSoup(n, tri.copy(), "generated", SourceFormat.BINARY)


def bar_with_hook(length: float = 60.0) -> IndexedMesh:
    """L-shaped bar: a beam with a hook block at one end."""
    beam = box((length, 8.0, 8.0), (0.0, 0.0, 0.0))
    hook = box((8.0, 8.0, 20.0), (length - 8.0, 0.0, -20.0))
    return merge(beam, hook)


def plate_grid(cells: int = 3, pitch: float = 12.0) -> IndexedMesh:
    """Grid of posts on a thin plate; a many-feature "mesh" style model."""
    span = cells * pitch
    parts = [box((span, span, 2.0), (0.0, 0.0, 0.0))]
    for i in range(cells):
        for j in range(cells):
            parts.append(box((4.0, 4.0, 10.0), (i * pitch + 4.0, j * pitch + 4.0, 2.0)))
    return merge(*parts)


def demo_catalog() -> list[tuple[str, str, IndexedMesh]]:
    """Seven built-in models, 4 "bar" and 3 "mesh", mirroring a starter set."""
    return [
        ("bar-straight", "bar", box((60.0, 8.0, 8.0))),
        ("bar-wide", "bar", box((60.0, 16.0, 6.0))),
        ("bar-hook", "bar", bar_with_hook()),
        ("bar-tall", "bar", box((40.0, 8.0, 24.0))),
        ("mesh-plate", "mesh", box((40.0, 40.0, 3.0))),
        ("mesh-grid", "mesh", plate_grid()),
        ("mesh-grid-fine", "mesh", plate_grid(cells=4, pitch=9.0)),
    ]
