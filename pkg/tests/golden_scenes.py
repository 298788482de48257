"""Fixed renderer scenes behind the golden-image tests.

Run `python3 tests/golden_scenes.py` to regenerate tests/golden/*.ppm
after an intentional renderer change; the tests compare bytes against
the committed files.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from meshlens import analysis
from meshlens.image import Frame, write_ppm
from meshlens.render import (
    composite_overlay,
    mesh_edge_segments,
    rasterize,
    synthesize_marker_frame,
)
from meshlens.shapes import bar_with_hook, box
from meshlens.vision import CameraIntrinsics, Pose, reference_pattern

GOLDEN_DIR = Path(__file__).parent / "golden"

K = CameraIntrinsics(fx=800.0, fy=800.0, cx=320.0, cy=240.0)
SIZE = (640, 480)


def _pose(tilt_deg: float, yaw_deg: float, dist_mm: float) -> Pose:
    tx, yz = np.radians(tilt_deg), np.radians(-yaw_deg)
    cx, sx = np.cos(tx), np.sin(tx)
    cz, sz = np.cos(yz), np.sin(yz)
    rot = np.array([[1, 0, 0], [0, cx, -sx], [0, sx, cx]], dtype=float) @ np.array(
        [[cz, -sz, 0], [sz, cz, 0], [0, 0, 1]], dtype=float
    )
    return Pose(rotation=rot, translation=np.array([0.0, 0.0, dist_mm]))


def scene_overlay_cube() -> bytes:
    """80mm-fit cube with wireframe over a synthesized marker frame."""
    pose = _pose(25.0, 40.0, 650.0)
    frame = synthesize_marker_frame(reference_pattern(), pose, K, SIZE, 120.0)
    mesh = box((80.0, 80.0, 80.0))
    base = analysis.fit_transform(mesh, 80.0)
    transform = analysis.ModelTransform(
        rot_y=pose.yaw, scale=base.scale, translation=base.translation
    )
    render = rasterize(mesh, transform, pose, K, SIZE)
    edges = mesh_edge_segments(mesh, transform, pose, K)
    return write_ppm(composite_overlay(frame, render, wireframe=True, edges=edges))


def scene_hook_on_gray() -> bytes:
    """Hooked bar shaded over a flat background, no wireframe."""
    pose = _pose(40.0, 200.0, 500.0)
    frame = Frame(np.full((SIZE[1], SIZE[0]), 64, dtype=np.uint8))
    mesh = bar_with_hook()
    base = analysis.fit_transform(mesh, 90.0)
    transform = analysis.ModelTransform(
        rot_x=np.pi / 12, rot_y=pose.yaw, scale=base.scale,
        translation=base.translation,
    )
    render = rasterize(mesh, transform, pose, K, SIZE)
    return write_ppm(composite_overlay(frame, render))


SCENES = {
    "overlay_cube.ppm": scene_overlay_cube,
    "hook_on_gray.ppm": scene_hook_on_gray,
}


def main() -> None:
    GOLDEN_DIR.mkdir(exist_ok=True)
    for name, build in SCENES.items():
        path = GOLDEN_DIR / name
        path.write_bytes(build())
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
