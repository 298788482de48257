"""Shared helpers: synthetic poses, frames and generated meshes."""

from __future__ import annotations

import numpy as np
import pytest

from meshlens.render import synthesize_marker_frame
from meshlens.stl import IndexedMesh
from meshlens.vision import CameraIntrinsics, Pose, reference_pattern

DEFAULT_K = CameraIntrinsics(fx=800.0, fy=800.0, cx=320.0, cy=240.0)
FRAME_SIZE = (640, 480)  # (w, h)


def rot_x(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_z(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def make_pose(tilt_deg: float, yaw_deg: float, dist_mm: float) -> Pose:
    """Marker tilted about camera x, spun by yaw about its own normal.

    Spinning the marker +yaw about its z axis rotates image content the
    other way, hence the negated angle; yaw_of_rotation reports +yaw.
    """
    rot = rot_x(np.radians(tilt_deg)) @ rot_z(-np.radians(yaw_deg))
    return Pose(rotation=rot, translation=np.array([0.0, 0.0, dist_mm]))


def synth_frame(pose: Pose, marker_side: float = 120.0,
                intrinsics: CameraIntrinsics = DEFAULT_K,
                size: tuple[int, int] = FRAME_SIZE):
    return synthesize_marker_frame(reference_pattern(), pose, intrinsics,
                                   size, marker_side)


def random_mesh(rng: np.random.Generator, n_faces: int) -> IndexedMesh:
    """Connected random triangle fan suitable for round-trip tests.

    Coordinates are quantized to f32-exact values so writing 32-bit STL
    is lossless and the weld can be compared exactly.
    """
    n_verts = max(3, n_faces // 2 + 2)
    verts = rng.uniform(-100.0, 100.0, size=(n_verts, 3))
    verts = verts.astype(np.float32).astype(np.float64)
    faces = np.empty((n_faces, 3), dtype=np.int64)
    faces[:, 0] = rng.integers(0, n_verts, size=n_faces)
    faces[:, 1] = (faces[:, 0] + 1 + rng.integers(0, n_verts - 2, size=n_faces)) % n_verts
    faces[:, 2] = (faces[:, 1] + 1 + rng.integers(0, n_verts - 2, size=n_faces)) % n_verts
    # Drop accidental repeats inside a face; replace with a safe triple.
    bad = (
        (faces[:, 0] == faces[:, 1])
        | (faces[:, 1] == faces[:, 2])
        | (faces[:, 0] == faces[:, 2])
    )
    faces[bad] = [0, 1, 2]
    return IndexedMesh(verts, faces)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0xC0FFEE)
