"""STL reading, vertex welding and binary STL writing.

Both binary and ASCII STL are parsed into a triangle soup; the soup is
welded into an indexed mesh for topology work.  Coordinates are promoted
to float64 on ingest so downstream geometry predicates have headroom
beyond the file's 32-bit floats.  All sizes are millimeters.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import MeshLensError

BINARY_HEADER_SIZE = 80
BINARY_FACET_SIZE = 50  # 12 f32 + u16 attribute

# Little-endian facet record: normal, three vertices, attribute byte count.
_FACET_DTYPE = np.dtype(
    [("normal", "<f4", (3,)), ("verts", "<f4", (3, 3)), ("attr", "<u2")]
)


class StlError(MeshLensError):
    pass


class TruncatedFile(StlError):
    """Binary facet count promises more bytes than the file contains."""


class StlSyntaxError(StlError):
    """ASCII grammar violation; carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class NonFiniteCoordinate(StlError):
    pass


class EmptyModel(StlError):
    pass


class TooManyFacets(StlError):
    pass


class SourceFormat(Enum):
    BINARY = "binary"
    ASCII = "ascii"


@dataclass
class TriangleSoup:
    """Facets exactly as stored in the file, before welding.

    normals: (n, 3) float64, unitless, may be zero.
    vertices: (n, 3, 3) float64 mm, one row of three corners per facet.
    """

    normals: np.ndarray
    vertices: np.ndarray
    name: str
    source_format: SourceFormat

    def __len__(self) -> int:
        return len(self.vertices)


@dataclass
class IndexedMesh:
    """Welded vertex/face representation. faces index into vertices."""

    vertices: np.ndarray  # (v, 3) float64 mm
    faces: np.ndarray  # (f, 3) int64

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.faces = np.asarray(self.faces, dtype=np.int64).reshape(-1, 3)
        if len(self.faces) and self.faces.max() >= len(self.vertices):
            raise ValueError("face index out of range")
        if len(self.faces) and self.faces.min() < 0:
            raise ValueError("negative face index")

    def __len__(self) -> int:
        return len(self.faces)

    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices.min(axis=0), self.vertices.max(axis=0)


def parse_stl(data: bytes) -> TriangleSoup:
    """Parse STL bytes, auto-detecting the format.

    Binary is chosen iff the file length equals 84 + 50*n for the facet
    count n stored at offset 80, regardless of whether the header starts
    with "solid" (real-world binary files often do).  Anything else is
    attempted as ASCII.
    """
    if not data:
        raise EmptyModel("empty input")

    declared = None
    if len(data) >= BINARY_HEADER_SIZE + 4:
        declared = struct.unpack_from("<I", data, BINARY_HEADER_SIZE)[0]
        expected = BINARY_HEADER_SIZE + 4 + BINARY_FACET_SIZE * declared
        if len(data) == expected:
            return _parse_binary(data, declared)

    head = data.lstrip()[:5].lower()
    if head == b"solid":
        try:
            return _parse_ascii(data)
        except StlSyntaxError:
            if declared is not None and _looks_truncated_binary(data, declared):
                raise TruncatedFile(
                    f"binary header declares {declared} facets but only "
                    f"{len(data)} bytes present"
                ) from None
            raise

    if declared is not None and _looks_truncated_binary(data, declared):
        raise TruncatedFile(
            f"binary header declares {declared} facets but only "
            f"{len(data)} bytes present"
        )
    raise StlSyntaxError(1, "not an STL file (no binary layout, no 'solid' keyword)")


def _looks_truncated_binary(data: bytes, declared: int) -> bool:
    """Shorter than the declared facet count promises, and binary-looking.

    A malformed ASCII file also has "some" u32 at offset 80; requiring a
    NUL byte (always present in real binary STL: header padding, f32
    payloads) keeps text files reporting their actual syntax error.
    """
    if BINARY_HEADER_SIZE + 4 + BINARY_FACET_SIZE * declared <= len(data):
        return False
    return b"\x00" in data


def _parse_binary(data: bytes, count: int) -> TriangleSoup:
    if count == 0:
        raise EmptyModel("binary STL declares 0 facets")
    name = data[:BINARY_HEADER_SIZE].decode("latin-1").rstrip(" \x00")
    records = np.frombuffer(data, dtype=_FACET_DTYPE, count=count, offset=84)
    normals = records["normal"].astype(np.float64)
    vertices = records["verts"].astype(np.float64)
    _check_finite(normals, vertices)
    return TriangleSoup(normals, vertices, name, SourceFormat.BINARY)


def _parse_ascii(data: bytes) -> TriangleSoup:
    text = data.decode("latin-1")
    # (line_no, tokens) for non-blank lines; keywords are case-insensitive.
    lines = [
        (no, line.split())
        for no, line in enumerate(text.splitlines(), start=1)
        if line.strip()
    ]
    pos = 0

    def peek():
        if pos >= len(lines):
            last = lines[-1][0] if lines else 1
            raise StlSyntaxError(last, "unexpected end of file")
        return lines[pos]

    def advance():
        nonlocal pos
        item = peek()
        pos += 1
        return item

    def parse_floats(no, tokens):
        try:
            return [float(t) for t in tokens]
        except ValueError:
            raise StlSyntaxError(no, f"bad number in {' '.join(tokens)!r}") from None

    no, tokens = advance()
    if tokens[0].lower() != "solid":
        raise StlSyntaxError(no, "expected 'solid'")
    name = " ".join(tokens[1:])

    normals = []
    vertices = []
    while True:
        no, tokens = advance()
        kw = tokens[0].lower()
        if kw == "endsolid":
            break
        if kw != "facet" or len(tokens) != 5 or tokens[1].lower() != "normal":
            raise StlSyntaxError(no, "expected 'facet normal nx ny nz' or 'endsolid'")
        normals.append(parse_floats(no, tokens[2:]))

        no, tokens = advance()
        if [t.lower() for t in tokens] != ["outer", "loop"]:
            raise StlSyntaxError(no, "expected 'outer loop'")

        corners = []
        for _ in range(3):
            no, tokens = advance()
            if tokens[0].lower() != "vertex" or len(tokens) != 4:
                raise StlSyntaxError(no, "expected 'vertex x y z'")
            corners.append(parse_floats(no, tokens[1:]))
        vertices.append(corners)

        no, tokens = advance()
        if tokens[0].lower() != "endloop":
            raise StlSyntaxError(no, "expected 'endloop'")
        no, tokens = advance()
        if tokens[0].lower() != "endfacet":
            raise StlSyntaxError(no, "expected 'endfacet'")

    if pos < len(lines):
        no, _ = lines[pos]
        raise StlSyntaxError(no, "content after 'endsolid'")
    if not vertices:
        raise EmptyModel("ASCII STL contains no facets")

    normals_arr = np.array(normals, dtype=np.float64)
    vertices_arr = np.array(vertices, dtype=np.float64)
    _check_finite(normals_arr, vertices_arr)
    return TriangleSoup(normals_arr, vertices_arr, name, SourceFormat.ASCII)


def _check_finite(normals: np.ndarray, vertices: np.ndarray) -> None:
    if not np.isfinite(vertices).all():
        raise NonFiniteCoordinate("non-finite vertex coordinate")
    if not np.isfinite(normals).all():
        raise NonFiniteCoordinate("non-finite facet normal")


DEFAULT_WELD_TOLERANCE = 1e-6  # mm; f32 coordinates rarely agree bitwise


def weld_vertices(soup: TriangleSoup, tolerance: float | None = DEFAULT_WELD_TOLERANCE) -> IndexedMesh:
    """Merge duplicate soup corners into an indexed mesh.

    tolerance=None merges only bitwise-equal coordinates; otherwise corners
    are snapped to a grid of cell size `tolerance` mm and merged per cell.
    Vertex order is order of first appearance.  Faces whose three welded
    indices are not distinct are kept; mesh analysis flags them later.
    """
    flat = np.ascontiguousarray(soup.vertices.reshape(-1, 3), dtype=np.float64)
    if tolerance is None:
        keys = flat.view([("", flat.dtype)] * 3).ravel()
    else:
        if tolerance <= 0:
            raise ValueError("tolerance must be positive")
        cells = np.floor(flat / tolerance).astype(np.int64)
        cells = np.ascontiguousarray(cells)
        keys = cells.view([("", cells.dtype)] * 3).ravel()

    _, first_idx, inverse = np.unique(keys, return_index=True, return_inverse=True)
    # np.unique sorts by key; re-rank unique ids by first appearance.
    appearance = np.argsort(first_idx, kind="stable")
    rank = np.empty(len(first_idx), dtype=np.int64)
    rank[appearance] = np.arange(len(first_idx))
    vertices = flat[first_idx[appearance]]
    faces = rank[inverse].reshape(-1, 3)
    return IndexedMesh(vertices, faces)


def write_stl(mesh: IndexedMesh, header: str = "meshlens binary STL") -> bytes:
    """Serialize to binary STL (little-endian, 80-byte header).

    The stored facet normal is the normalized cross product of the edge
    vectors; degenerate faces get a zero normal.
    """
    nfaces = len(mesh.faces)
    if nfaces == 0:
        raise EmptyModel("refusing to write a mesh with no faces")
    if nfaces > 0xFFFFFFFF:
        raise TooManyFacets(f"{nfaces} facets exceed the 32-bit count field")

    tri = mesh.vertices[mesh.faces]  # (f, 3, 3)
    normals = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    lengths = np.linalg.norm(normals, axis=1)
    nonzero = lengths > 0.0
    normals[nonzero] /= lengths[nonzero, None]
    normals[~nonzero] = 0.0

    records = np.zeros(nfaces, dtype=_FACET_DTYPE)
    records["normal"] = normals.astype(np.float32)
    records["verts"] = tri.astype(np.float32)
    head = header.encode("latin-1")[:BINARY_HEADER_SIZE]
    head = head.ljust(BINARY_HEADER_SIZE, b"\x00")
    return head + struct.pack("<I", nfaces) + records.tobytes()


def canonicalize(mesh: IndexedMesh) -> IndexedMesh:
    """Reindex vertices into first-appearance order over the face list.

    Two meshes equal up to vertex reordering canonicalize to identical
    arrays, which is how round-trip tests compare results.  Unreferenced
    vertices are dropped (they cannot survive an STL round trip anyway).
    """
    flat = mesh.faces.ravel()
    seen = np.zeros(len(mesh.vertices), dtype=bool)
    order = []
    for idx in flat:
        if not seen[idx]:
            seen[idx] = True
            order.append(idx)
    order = np.array(order, dtype=np.int64)
    remap = np.full(len(mesh.vertices), -1, dtype=np.int64)
    remap[order] = np.arange(len(order))
    return IndexedMesh(mesh.vertices[order], remap[mesh.faces])
