"""Printability diagnostics: edge topology, shells, volume, orientation.

The checks formalize what a person looks for when eyeballing a model
before printing: gaps (boundary edges), stacked shells that are not
actually joined (components), inverted or inconsistent orientation, and
degenerate geometry.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .errors import MeshLensError
from .stl import IndexedMesh, TriangleSoup

DEFAULT_EPS_AREA = 1e-8  # mm^2

CONNECTIVITY_METRIC = "vertex-sharing"
ALIGNMENT_METRIC = "min-pairwise-aabb-gap-mm"


class DegenerateExtent(MeshLensError):
    """Bounding box is empty or flat on every axis."""


@dataclass
class EdgeReport:
    """Undirected edges classified by face multiplicity.

    multiplicity 1 = boundary, 2 = interior, >=3 = non-manifold; every
    distinct edge lands in exactly one class.
    """

    interior_count: int
    boundary_edges: np.ndarray  # (k, 2) int64, each row (min, max), sorted
    nonmanifold_edges: np.ndarray  # (m, 2) int64, sorted
    nonmanifold_multiplicity: np.ndarray  # (m,) int64
    orientation_consistent: bool


@dataclass
class BoundaryLoop:
    vertices: list[int]
    closed: bool


@dataclass
class ModelTransform:
    """Scale, fixed-order X->Y->Z rotation about the bbox center, then translation."""

    rot_x: float = 0.0
    rot_y: float = 0.0
    rot_z: float = 0.0
    scale: float = 1.0
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        self.translation = np.asarray(self.translation, dtype=np.float64).reshape(3)

    def rotation_matrix(self) -> np.ndarray:
        cx, sx = math.cos(self.rot_x), math.sin(self.rot_x)
        cy, sy = math.cos(self.rot_y), math.sin(self.rot_y)
        cz, sz = math.cos(self.rot_z), math.sin(self.rot_z)
        rx = np.array([[1, 0, 0], [0, cx, -sx], [0, sx, cx]], dtype=np.float64)
        ry = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]], dtype=np.float64)
        rz = np.array([[cz, -sz, 0], [sz, cz, 0], [0, 0, 1]], dtype=np.float64)
        return rz @ ry @ rx

    def apply(self, points: np.ndarray, center: np.ndarray) -> np.ndarray:
        """p -> R*(s*(p - center)) + center + translation."""
        pts = np.asarray(points, dtype=np.float64)
        center = np.asarray(center, dtype=np.float64)
        local = (pts - center) * self.scale
        return local @ self.rotation_matrix().T + center + self.translation


@dataclass
class PrintabilityReport:
    watertight: bool
    boundary_loops: list[BoundaryLoop]
    nonmanifold_edge_count: int
    component_count: int
    degenerate_face_indices: list[int]
    signed_volume: float
    orientation_inverted: bool
    orientation_consistent: bool
    max_normal_deviation: float
    normals_absent: bool
    bbox_min: np.ndarray
    bbox_max: np.ndarray
    component_separation: float | None

    def to_dict(self) -> dict:
        """Stable JSON schema; arrays sorted by index, documented key names."""
        return {
            "alignment_metric": ALIGNMENT_METRIC,
            "bbox_max_mm": [float(v) for v in self.bbox_max],
            "bbox_min_mm": [float(v) for v in self.bbox_min],
            "boundary_loop_count": len(self.boundary_loops),
            "boundary_loops": [
                {"closed": loop.closed, "vertices": [int(v) for v in loop.vertices]}
                for loop in self.boundary_loops
            ],
            "component_count": self.component_count,
            "component_separation_mm": self.component_separation,
            "connectivity": CONNECTIVITY_METRIC,
            "degenerate_face_indices": [int(i) for i in self.degenerate_face_indices],
            "max_normal_deviation_deg": self.max_normal_deviation,
            "nonmanifold_edge_count": self.nonmanifold_edge_count,
            "normals_absent": self.normals_absent,
            "orientation_consistent": self.orientation_consistent,
            "orientation_inverted": self.orientation_inverted,
            "signed_volume_mm3": self.signed_volume,
            "watertight": self.watertight,
        }


def _directed_edges(mesh: IndexedMesh) -> np.ndarray:
    f = mesh.faces
    return np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])


def edge_classification(mesh: IndexedMesh) -> EdgeReport:
    """Classify every undirected edge by the number of faces using it."""
    directed = _directed_edges(mesh)
    undirected = np.sort(directed, axis=1)
    flipped = directed[:, 0] > directed[:, 1]

    keys = np.ascontiguousarray(undirected).view([("", undirected.dtype)] * 2).ravel()
    _, inverse, counts = np.unique(keys, return_inverse=True, return_counts=True)
    order = np.argsort(inverse, kind="stable")
    firsts = order[np.concatenate([[0], np.cumsum(counts[:-1])])]
    edges = undirected[firsts]  # unique edges in key-sorted order

    boundary = edges[counts == 1]
    nonmanifold_mask = counts >= 3
    nonmanifold = edges[nonmanifold_mask]
    interior_mask = counts == 2

    # An interior edge is consistently oriented iff its two directed copies
    # run in opposite directions (one flipped, one not).
    flip_sums = np.zeros(len(edges), dtype=np.int64)
    np.add.at(flip_sums, inverse, flipped.astype(np.int64))
    consistent = bool(np.all(flip_sums[interior_mask] == 1)) if interior_mask.any() else True

    return EdgeReport(
        interior_count=int(interior_mask.sum()),
        boundary_edges=boundary.astype(np.int64),
        nonmanifold_edges=nonmanifold.astype(np.int64),
        nonmanifold_multiplicity=counts[nonmanifold_mask].astype(np.int64),
        orientation_consistent=consistent,
    )


def boundary_loops(report: EdgeReport) -> list[BoundaryLoop]:
    """Chain boundary edges into maximal loops.

    Vertices on more than two boundary edges split chains; open chains are
    reported with closed=False.  Output order is deterministic: chains from
    the smallest endpoint first, then cycles from their smallest vertex.
    """
    adj: dict[int, list[int]] = defaultdict(list)
    for a, b in report.boundary_edges:
        adj[int(a)].append(int(b))
        adj[int(b)].append(int(a))
    for v in adj:
        adj[v].sort()

    unused: set[tuple[int, int]] = {
        (int(min(a, b)), int(max(a, b))) for a, b in report.boundary_edges
    }
    loops: list[BoundaryLoop] = []

    def take(a: int, b: int) -> None:
        unused.discard((min(a, b), max(a, b)))

    def next_vertex(current: int) -> int | None:
        for nb in adj[current]:
            if (min(current, nb), max(current, nb)) in unused:
                return nb
        return None

    # Open chains start and end at vertices whose boundary degree is not 2.
    endpoints = sorted(v for v, nbs in adj.items() if len(nbs) != 2)
    for start in endpoints:
        while True:
            nb = next_vertex(start)
            if nb is None:
                break
            chain = [start]
            current, previous = nb, start
            take(previous, current)
            chain.append(current)
            while len(adj[current]) == 2:
                nxt = next_vertex(current)
                if nxt is None:
                    break
                take(current, nxt)
                chain.append(nxt)
                current = nxt
            loops.append(BoundaryLoop(chain, closed=False))

    # Whatever remains is degree-2 everywhere: closed cycles.
    while unused:
        start = min(min(e) for e in unused)
        cycle = [start]
        current = start
        while True:
            nxt = next_vertex(current)
            take(current, nxt)
            if nxt == start:
                break
            cycle.append(nxt)
            current = nxt
        loops.append(BoundaryLoop(cycle, closed=True))

    return loops


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def connected_components(mesh: IndexedMesh) -> tuple[int, np.ndarray]:
    """Face components under vertex-sharing adjacency.

    Faces sharing at least one welded vertex are connected (touching at a
    single corner counts as one piece).  Labels are dense in [0, count),
    assigned in order of first face occurrence.
    """
    uf = _UnionFind(len(mesh.vertices))
    for a, b, c in mesh.faces:
        uf.union(int(a), int(b))
        uf.union(int(a), int(c))

    labels = np.empty(len(mesh.faces), dtype=np.int64)
    dense: dict[int, int] = {}
    for i, face in enumerate(mesh.faces):
        root = uf.find(int(face[0]))
        if root not in dense:
            dense[root] = len(dense)
        labels[i] = dense[root]
    return len(dense), labels


def degenerate_faces(mesh: IndexedMesh, eps_area: float = DEFAULT_EPS_AREA) -> list[int]:
    """Indices of faces whose doubled-area vector is shorter than 2*eps_area."""
    if eps_area < 0:
        raise ValueError("eps_area must be non-negative")
    if len(mesh.faces) == 0:
        return []
    tri = mesh.vertices[mesh.faces]
    doubled = np.linalg.norm(np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]), axis=1)
    return [int(i) for i in np.nonzero(doubled < 2.0 * eps_area)[0]]


def signed_volume(mesh: IndexedMesh) -> float:
    """Sum of signed tetrahedron volumes det(v0,v1,v2)/6 over all faces.

    Equals the enclosed volume only for a watertight, outward-oriented
    mesh; negative means globally inverted orientation.
    """
    tri = mesh.vertices[mesh.faces]
    dets = np.einsum("ij,ij->i", tri[:, 0], np.cross(tri[:, 1], tri[:, 2]))
    return float(dets.sum() / 6.0)


def normal_angles(soup: TriangleSoup, eps_area: float = DEFAULT_EPS_AREA) -> np.ndarray:
    """Per-facet angle (degrees) between stored and computed normals.

    Facets with a zero stored normal or degenerate geometry are skipped;
    the returned array covers only the checked facets.
    """
    cross = np.cross(
        soup.vertices[:, 1] - soup.vertices[:, 0],
        soup.vertices[:, 2] - soup.vertices[:, 0],
    )
    cross_len = np.linalg.norm(cross, axis=1)
    stored_len = np.linalg.norm(soup.normals, axis=1)
    ok = (stored_len > 0.0) & (cross_len >= 2.0 * eps_area)
    if not ok.any():
        return np.empty(0)
    dots = np.einsum("ij,ij->i", soup.normals[ok], cross[ok])
    cosines = np.clip(dots / (stored_len[ok] * cross_len[ok]), -1.0, 1.0)
    return np.degrees(np.arccos(cosines))


def normal_deviation(soup: TriangleSoup, eps_area: float = DEFAULT_EPS_AREA) -> float:
    """Worst stored-vs-computed normal disagreement, 0 if nothing checkable."""
    angles = normal_angles(soup, eps_area)
    return float(angles.max()) if len(angles) else 0.0


def _component_bboxes(mesh: IndexedMesh, labels: np.ndarray, count: int) -> list[tuple[np.ndarray, np.ndarray]]:
    boxes = []
    for comp in range(count):
        verts = mesh.vertices[np.unique(mesh.faces[labels == comp])]
        boxes.append((verts.min(axis=0), verts.max(axis=0)))
    return boxes


def component_separation(mesh: IndexedMesh, labels: np.ndarray, count: int) -> float | None:
    """Minimum pairwise axis-aligned bounding-box gap between components.

    This is the "alignment" metric reported for multi-shell models: 0 when
    component boxes touch or overlap, else the AABB-to-AABB distance.
    """
    if count < 2:
        return None
    boxes = _component_bboxes(mesh, labels, count)
    best = math.inf
    for i in range(count):
        for j in range(i + 1, count):
            (amin, amax), (bmin, bmax) = boxes[i], boxes[j]
            gaps = np.maximum(0.0, np.maximum(bmin - amax, amin - bmax))
            best = min(best, float(np.linalg.norm(gaps)))
    return best


def analyze(mesh: IndexedMesh, soup: TriangleSoup | None = None,
            eps_area: float = DEFAULT_EPS_AREA) -> PrintabilityReport:
    """Aggregate every check into one report.

    Watertight means: no boundary edges, no non-manifold edges, and
    consistent orientation across every interior edge. The stored-normal
    comparison needs the original facet soup; without one it is skipped.
    """
    edges = edge_classification(mesh)
    loops = boundary_loops(edges)
    count, labels = connected_components(mesh)
    volume = signed_volume(mesh)
    angles = normal_angles(soup, eps_area) if soup is not None else np.empty(0)

    watertight = (
        len(edges.boundary_edges) == 0
        and len(edges.nonmanifold_edges) == 0
        and edges.orientation_consistent
    )
    bbox_min, bbox_max = mesh.bbox()
    return PrintabilityReport(
        watertight=watertight,
        boundary_loops=loops,
        nonmanifold_edge_count=len(edges.nonmanifold_edges),
        component_count=count,
        degenerate_face_indices=degenerate_faces(mesh, eps_area),
        signed_volume=volume,
        orientation_inverted=watertight and volume < 0.0,
        orientation_consistent=edges.orientation_consistent,
        max_normal_deviation=float(angles.max()) if len(angles) else 0.0,
        normals_absent=len(angles) == 0,
        bbox_min=bbox_min,
        bbox_max=bbox_max,
        component_separation=component_separation(mesh, labels, count),
    )


def fit_transform(mesh: IndexedMesh, target_extent: float) -> ModelTransform:
    """Uniform scale to the target extent, translation centering the bbox."""
    if target_extent <= 0:
        raise ValueError("target_extent must be positive")
    bbox_min, bbox_max = mesh.bbox()
    extent = float((bbox_max - bbox_min).max())
    if extent <= 0.0:
        raise DegenerateExtent("model bounding box has no extent")
    center = (bbox_min + bbox_max) / 2.0
    return ModelTransform(scale=target_extent / extent, translation=-center)
