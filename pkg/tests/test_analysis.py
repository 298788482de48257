"""Topology and printability checks against brute-force oracles."""

from __future__ import annotations

import json
from collections import defaultdict

import numpy as np
import pytest

from meshlens import analysis, shapes
from meshlens.analysis import (
    BoundaryLoop,
    DegenerateExtent,
    ModelTransform,
    analyze,
    boundary_loops,
    component_separation,
    connected_components,
    degenerate_faces,
    edge_classification,
    fit_transform,
    normal_deviation,
    signed_volume,
)
from meshlens.stl import IndexedMesh

from conftest import random_mesh


def oracle_edge_counts(mesh: IndexedMesh) -> dict[tuple[int, int], int]:
    counts: dict[tuple[int, int], int] = defaultdict(int)
    for a, b, c in mesh.faces.tolist():
        for u, v in ((a, b), (b, c), (c, a)):
            counts[(min(u, v), max(u, v))] += 1
    return counts


def oracle_orientation_consistent(mesh: IndexedMesh) -> bool:
    directions: dict[tuple[int, int], list[tuple[int, int]]] = defaultdict(list)
    for a, b, c in mesh.faces.tolist():
        for u, v in ((a, b), (b, c), (c, a)):
            directions[(min(u, v), max(u, v))].append((u, v))
    for uses in directions.values():
        if len(uses) == 2 and uses[0] == uses[1]:
            return False
    return True


def oracle_components(mesh: IndexedMesh) -> list[frozenset[int]]:
    """Face partition via BFS over shared vertices."""
    vert_faces: dict[int, list[int]] = defaultdict(list)
    for i, face in enumerate(mesh.faces.tolist()):
        for v in face:
            vert_faces[v].append(i)
    seen = [False] * len(mesh.faces)
    parts = []
    for start in range(len(mesh.faces)):
        if seen[start]:
            continue
        queue, members = [start], set()
        seen[start] = True
        while queue:
            f = queue.pop()
            members.add(f)
            for v in mesh.faces[f].tolist():
                for g in vert_faces[v]:
                    if not seen[g]:
                        seen[g] = True
                        queue.append(g)
        parts.append(frozenset(members))
    return parts


FIXTURES = [
    shapes.unit_cube(),
    shapes.open_box(),
    shapes.two_shell_box(),
    shapes.bar_with_hook(),
    shapes.plate_grid(),
    shapes.flipped(shapes.unit_cube()),
    shapes.merge(shapes.unit_cube(), shapes.box(origin=(5.0, 0.0, 0.0))),
]


@pytest.mark.parametrize("idx", range(len(FIXTURES)))
def test_edge_classification_matches_oracle(idx):
    mesh = FIXTURES[idx]
    report = edge_classification(mesh)
    counts = oracle_edge_counts(mesh)
    boundary = {k for k, n in counts.items() if n == 1}
    interior = {k for k, n in counts.items() if n == 2}
    nonmanifold = {k: n for k, n in counts.items() if n >= 3}

    assert {tuple(e) for e in report.boundary_edges.tolist()} == boundary
    assert report.interior_count == len(interior)
    got_nm = {
        tuple(e): int(m)
        for e, m in zip(report.nonmanifold_edges.tolist(),
                        report.nonmanifold_multiplicity.tolist())
    }
    assert got_nm == nonmanifold
    assert report.orientation_consistent == oracle_orientation_consistent(mesh)


def test_edge_classification_matches_oracle_random(rng):
    for _ in range(40):
        mesh = random_mesh(rng, int(rng.integers(4, 120)))
        report = edge_classification(mesh)
        counts = oracle_edge_counts(mesh)
        assert {tuple(e) for e in report.boundary_edges.tolist()} == {
            k for k, n in counts.items() if n == 1
        }
        got_nm = {
            tuple(e): int(m)
            for e, m in zip(report.nonmanifold_edges.tolist(),
                            report.nonmanifold_multiplicity.tolist())
        }
        assert got_nm == {k: n for k, n in counts.items() if n >= 3}
        assert report.interior_count == sum(1 for n in counts.values() if n == 2)
        assert report.orientation_consistent == oracle_orientation_consistent(mesh)


@pytest.mark.parametrize("idx", range(len(FIXTURES)))
def test_components_match_oracle(idx):
    mesh = FIXTURES[idx]
    count, labels = connected_components(mesh)
    parts = oracle_components(mesh)
    assert count == len(parts)
    got = defaultdict(set)
    for face, label in enumerate(labels.tolist()):
        got[label].add(face)
    assert {frozenset(m) for m in got.values()} == set(parts)


def test_component_labels_dense_first_occurrence():
    mesh = shapes.two_shell_box()
    count, labels = connected_components(mesh)
    assert count == 2
    assert labels[0] == 0
    assert set(labels.tolist()) == {0, 1}


def test_cube_is_watertight():
    report = analyze(shapes.unit_cube())
    assert report.watertight
    assert report.boundary_loops == []
    assert report.component_count == 1
    assert report.nonmanifold_edge_count == 0
    assert not report.orientation_inverted


def test_open_box_has_one_square_loop():
    report = analyze(shapes.open_box())
    assert not report.watertight
    assert len(report.boundary_loops) == 1
    loop = report.boundary_loops[0]
    assert loop.closed
    assert len(loop.vertices) == 4


def test_two_shells_report_two_components():
    report = analyze(shapes.two_shell_box(gap=0.5))
    assert report.component_count == 2
    assert report.component_separation == pytest.approx(0.5)


def test_single_component_has_no_separation():
    assert analyze(shapes.unit_cube()).component_separation is None


def test_touching_shells_separation_zero():
    a = shapes.box(size=(2.0, 2.0, 2.0))
    b = shapes.box(size=(2.0, 2.0, 2.0), origin=(2.0, 0.0, 0.0))
    report = analyze(shapes.merge(a, b))
    # The shells share the x=2 plane but no welded vertices; the AABB gap
    # is zero even though they are separate components.
    assert report.component_count == 2
    assert report.component_separation == pytest.approx(0.0)


def test_diagonal_gap_is_euclidean():
    a = shapes.box()
    b = shapes.box(origin=(4.0, 3.0, 1.0))
    count, labels = connected_components(shapes.merge(a, b))
    sep = component_separation(shapes.merge(a, b), labels, count)
    np.testing.assert_allclose(sep, np.linalg.norm([3.0, 2.0, 0.0]))


def test_boundary_loop_edges_cover_boundary():
    for mesh in (shapes.open_box(), shapes.plate_grid()):
        report = edge_classification(mesh)
        loops = boundary_loops(report)
        covered = set()
        for loop in loops:
            verts = loop.vertices + ([loop.vertices[0]] if loop.closed else [])
            for u, v in zip(verts, verts[1:]):
                edge = (min(u, v), max(u, v))
                assert edge not in covered, "edge reported twice"
                covered.add(edge)
        expected = {tuple(e) for e in report.boundary_edges.tolist()}
        assert covered == expected


def test_open_chain_reported_unclosed():
    # Two triangles sharing one edge: the boundary is a single open-ended
    # walk (every vertex has boundary degree 2 except none... the bowtie
    # below has explicit odd-degree vertices instead).
    verts = np.array([
        [0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0],
        [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0],
    ])
    faces = np.array([[0, 1, 2], [0, 3, 4]])
    loops = boundary_loops(edge_classification(IndexedMesh(verts, faces)))
    # Vertex 0 has boundary degree 4, so chains split there.
    assert all(not loop.closed for loop in loops)
    assert sum(len(l.vertices) - 1 for l in loops) == 6


def test_signed_volume_unit_cube():
    assert signed_volume(shapes.unit_cube()) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("s", [0.5, 2.0, 10.0])
def test_signed_volume_scales_cubically(s):
    mesh = shapes.unit_cube()
    scaled = IndexedMesh(mesh.vertices * s, mesh.faces)
    assert signed_volume(scaled) == pytest.approx(s**3, rel=1e-9)


def test_flipped_cube_negative_volume_and_inverted():
    report = analyze(shapes.flipped(shapes.unit_cube()))
    assert report.signed_volume == pytest.approx(-1.0, abs=1e-12)
    assert report.watertight
    assert report.orientation_inverted


def test_volume_translation_invariant_when_closed(rng):
    mesh = shapes.unit_cube()
    shift = rng.uniform(-50, 50, size=3)
    moved = IndexedMesh(mesh.vertices + shift, mesh.faces)
    assert signed_volume(moved) == pytest.approx(1.0, rel=1e-9)


def test_inconsistent_orientation_detected():
    mesh = shapes.unit_cube()
    faces = mesh.faces.copy()
    faces[0] = faces[0][::-1]
    report = analyze(IndexedMesh(mesh.vertices, faces))
    assert not report.orientation_consistent
    assert not report.watertight


def test_degenerate_face_flagged():
    verts = np.array([
        [0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0],
        [2.0, 0.0, 0.0], [3.0, 0.0, 0.0],  # collinear with vertex 1
    ])
    faces = np.array([[0, 1, 2], [1, 3, 4]])
    assert degenerate_faces(IndexedMesh(verts, faces)) == [1]


def test_degenerate_eps_validation():
    with pytest.raises(ValueError):
        degenerate_faces(shapes.unit_cube(), eps_area=-1.0)


def test_normal_deviation_zero_for_computed_normals():
    soup = shapes.soup_from_mesh(shapes.unit_cube())
    assert normal_deviation(soup) == pytest.approx(0.0, abs=1e-9)


def test_normal_deviation_detects_flipped_normals():
    soup = shapes.soup_from_mesh(shapes.unit_cube())
    soup.normals[0] = -soup.normals[0]
    assert normal_deviation(soup) == pytest.approx(180.0)


def test_zero_normals_are_skipped():
    soup = shapes.soup_from_mesh(shapes.unit_cube(), normals="zero")
    report = analyze(shapes.unit_cube(), soup)
    assert report.normals_absent
    assert report.max_normal_deviation == 0.0


def test_report_dict_is_json_stable():
    report = analyze(shapes.two_shell_box())
    d = report.to_dict()
    assert json.loads(json.dumps(d)) == d
    assert d["connectivity"] == "vertex-sharing"
    assert d["boundary_loop_count"] == len(d["boundary_loops"])


def test_fit_transform_centers_and_scales():
    mesh = shapes.box(size=(2.0, 1.0, 1.0), origin=(10.0, 0.0, 0.0))
    t = fit_transform(mesh, 80.0)
    assert t.scale == pytest.approx(40.0)
    lo0, hi0 = mesh.bbox()
    moved = t.apply(mesh.vertices, center=(lo0 + hi0) / 2)
    lo, hi = moved.min(axis=0), moved.max(axis=0)
    np.testing.assert_allclose(hi - lo, [80.0, 40.0, 40.0])
    np.testing.assert_allclose((lo + hi) / 2, 0.0, atol=1e-10)


def test_fit_transform_rejects_empty_extent():
    point = IndexedMesh(np.zeros((3, 3)), np.array([[0, 1, 2]]))
    with pytest.raises(DegenerateExtent):
        fit_transform(point, 80.0)
    with pytest.raises(ValueError):
        fit_transform(shapes.unit_cube(), 0.0)


def test_transform_apply_matches_manual(rng):
    t = ModelTransform(rot_x=0.3, rot_y=-1.1, rot_z=2.0, scale=1.7,
                       translation=np.array([4.0, -2.0, 9.0]))
    pts = rng.uniform(-5, 5, size=(20, 3))
    center = np.array([1.0, 2.0, 3.0])
    manual = (t.rotation_matrix() @ ((pts - center) * 1.7).T).T + center + t.translation
    np.testing.assert_allclose(t.apply(pts, center), manual, atol=1e-12)


def test_transform_rejects_bad_scale():
    with pytest.raises(ValueError):
        ModelTransform(scale=0.0)
