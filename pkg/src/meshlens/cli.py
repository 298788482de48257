"""Command line front end.

Exit codes follow one rule everywhere: 0 means the operation succeeded
and, where it applies, the answer is positive (mesh is clean, marker was
found); 1 means the operation ran fine but the answer is negative;
2 means the invocation itself failed (bad arguments, unreadable or
malformed files).
"""

from __future__ import annotations

import functools
import json
import math
import sys
from pathlib import Path

import click
import numpy as np

from . import analysis, session as sess, shapes
from .errors import MeshLensError
from .image import Frame, read_pgm, write_pgm, write_ppm
from .render import composite_overlay, mesh_edge_segments, rasterize
from .stl import parse_stl, weld_vertices
from .vision import (
    DetectConfig,
    Detection,
    detect_marker,
    intrinsics_from_dict,
    parse_pattern_text,
    pattern_to_text,
    reference_marker_frame,
    reference_pattern,
    train_pattern,
)


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(2)


def guarded(fn):
    """Map domain and I/O failures onto exit code 2."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except MeshLensError as exc:
            _fail(str(exc))
        except OSError as exc:
            _fail(str(exc))
        except json.JSONDecodeError as exc:
            _fail(f"invalid JSON: {exc}")

    return wrapper


def _load_mesh(path: str):
    soup = parse_stl(Path(path).read_bytes())
    return weld_vertices(soup), soup


def _load_frame(path: str) -> Frame:
    return read_pgm(Path(path).read_bytes())


def _load_intrinsics(path: str):
    return intrinsics_from_dict(json.loads(Path(path).read_text()))


def _load_pattern(path: str):
    return parse_pattern_text(Path(path).read_text())


def detection_to_dict(det: Detection) -> dict:
    return {
        "confidence": det.confidence,
        "rotation_index": det.rotation_index,
        "yaw_rad": det.yaw,
        "yaw_deg": math.degrees(det.yaw),
        "corners_px": [[float(u), float(v)] for u, v in det.corners],
        "rotation": [[float(v) for v in row] for row in det.pose.rotation],
        "translation_mm": [float(v) for v in det.pose.translation],
        "distance_mm": det.pose.distance,
        "reproj_error_px2": det.reproj_error,
    }


@click.group()
@click.version_option(package_name="meshlens", prog_name="meshlens")
def main():
    """Mesh print checks and marker-driven AR preview."""


@main.command()
@click.argument("model", type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True, help="Emit the full report as JSON.")
@click.option("--weld-tolerance", type=float, default=1e-6, show_default=True,
              help="Vertex weld tolerance in mm.")
@guarded
def inspect(model, as_json, weld_tolerance):
    """Analyze a mesh for print problems.

    Exits 0 when the mesh is watertight, consistently oriented, in one
    piece and free of degenerate faces; exits 1 when any issue is found.
    """
    soup = parse_stl(Path(model).read_bytes())
    mesh = weld_vertices(soup, tolerance=weld_tolerance)
    report = analysis.analyze(mesh, soup)
    data = report.to_dict()
    if as_json:
        click.echo(json.dumps(data, indent=2, sort_keys=True))
    else:
        click.echo(f"faces: {len(mesh.faces)}  vertices: {len(mesh.vertices)}")
        click.echo(f"watertight: {report.watertight}")
        click.echo(f"boundary loops: {len(report.boundary_loops)}")
        click.echo(f"non-manifold edges: {report.nonmanifold_edge_count}")
        click.echo(f"components: {report.component_count}")
        if report.component_separation is not None:
            click.echo(f"component separation: {report.component_separation:.3f} mm")
        click.echo(f"signed volume: {report.signed_volume:.3f} mm^3")
        click.echo(f"inverted orientation: {report.orientation_inverted}")
        click.echo(f"degenerate faces: {len(report.degenerate_face_indices)}")
    clean = (
        report.watertight
        and not report.orientation_inverted
        and report.component_count == 1
        and not report.degenerate_face_indices
    )
    sys.exit(0 if clean else 1)


@main.command()
@click.argument("image", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--out", required=True, type=click.Path(dir_okay=False),
              help="Pattern file to write.")
@click.option("--grid", type=int, default=16, show_default=True)
@click.option("--border", type=float, default=0.25, show_default=True)
@guarded
def train(image, out, grid, border):
    """Learn a marker pattern from an axis-aligned marker photo (PGM)."""
    pattern = train_pattern(_load_frame(image), grid, border)
    Path(out).write_text(pattern_to_text(pattern))
    click.echo(f"wrote {grid}x{grid} pattern to {out}")


_DETECT_OPTIONS = [
    click.option("--pattern", "pattern_path", required=True,
                 type=click.Path(exists=True, dir_okay=False)),
    click.option("--camera", "camera_path", required=True,
                 type=click.Path(exists=True, dir_okay=False),
                 help="Intrinsics JSON with fx, fy, cx, cy."),
    click.option("--marker-side", type=float, required=True,
                 help="Physical marker side length in mm."),
    click.option("--window", type=int, default=31, show_default=True),
    click.option("--offset", type=float, default=7.0, show_default=True),
    click.option("--min-area", type=float, default=400.0, show_default=True),
    click.option("--threshold", type=float, default=0.75, show_default=True),
    click.option("--no-refine", is_flag=True, help="Skip subpixel corner refinement."),
]


def _with_detect_options(fn):
    for opt in reversed(_DETECT_OPTIONS):
        fn = opt(fn)
    return fn


def _run_detection(frame_path, pattern_path, camera_path, marker_side,
                   window, offset, min_area, threshold, no_refine):
    frame = _load_frame(frame_path)
    pattern = _load_pattern(pattern_path)
    intrinsics = _load_intrinsics(camera_path)
    cfg = DetectConfig(
        window=window, offset=offset, min_area=min_area,
        match_threshold=threshold, refine_corners=not no_refine,
    )
    return frame, intrinsics, detect_marker(frame, pattern, intrinsics, marker_side, cfg)


@main.command()
@click.argument("frame", type=click.Path(exists=True, dir_okay=False))
@_with_detect_options
@click.option("--json", "as_json", is_flag=True)
@guarded
def detect(frame, pattern_path, camera_path, marker_side, window, offset,
           min_area, threshold, no_refine, as_json):
    """Detect the marker in one camera frame (PGM).

    Exits 0 with the pose when found, 1 when no marker is present.
    """
    _, _, det = _run_detection(frame, pattern_path, camera_path, marker_side,
                               window, offset, min_area, threshold, no_refine)
    if det is None:
        click.echo("no marker detected")
        sys.exit(1)
    if as_json:
        click.echo(json.dumps(detection_to_dict(det), indent=2, sort_keys=True))
    else:
        t = det.pose.translation
        click.echo(f"confidence: {det.confidence:.3f}  rotation index: {det.rotation_index}")
        click.echo(f"yaw: {math.degrees(det.yaw):+.2f} deg")
        click.echo(f"translation: ({t[0]:.1f}, {t[1]:.1f}, {t[2]:.1f}) mm")
    sys.exit(0)


@main.command()
@click.argument("frame", type=click.Path(exists=True, dir_okay=False))
@click.argument("model", type=click.Path(exists=True, dir_okay=False))
@_with_detect_options
@click.option("-o", "--out", required=True, type=click.Path(dir_okay=False),
              help="Output PPM image.")
@click.option("--scale-mode", type=click.Choice(["fit", "true"]), default="fit",
              show_default=True)
@click.option("--target-extent", type=float, default=80.0, show_default=True)
@click.option("--zoom", type=float, default=1.0, show_default=True)
@click.option("--wireframe", is_flag=True, help="Draw visible mesh edges.")
@guarded
def overlay(frame, model, pattern_path, camera_path, marker_side, window, offset,
            min_area, threshold, no_refine, out, scale_mode, target_extent,
            zoom, wireframe):
    """Render a model onto a frame at the detected marker pose.

    Without a detection the frame is passed through unchanged and the
    exit code is 1, mirroring an AR view with the overlay hidden.
    """
    cam_frame, intrinsics, det = _run_detection(
        frame, pattern_path, camera_path, marker_side,
        window, offset, min_area, threshold, no_refine,
    )
    mesh, _ = _load_mesh(model)
    if det is None:
        rgb = np.repeat(cam_frame.pixels[:, :, None], 3, axis=2)
        Path(out).write_bytes(write_ppm(rgb))
        click.echo("no marker detected; wrote frame unchanged")
        sys.exit(1)

    if scale_mode == "fit":
        base = analysis.fit_transform(mesh, target_extent)
    else:
        lo, hi = mesh.bbox()
        base = analysis.ModelTransform(translation=-0.5 * (lo + hi))
    transform = analysis.ModelTransform(
        rot_y=det.yaw, scale=base.scale * zoom, translation=base.translation,
    )
    size = (cam_frame.width, cam_frame.height)
    render = rasterize(mesh, transform, det.pose, intrinsics, size)
    edges = mesh_edge_segments(mesh, transform, det.pose, intrinsics) if wireframe else None
    rgb = composite_overlay(cam_frame, render, wireframe=wireframe, edges=edges)
    Path(out).write_bytes(write_ppm(rgb))
    click.echo(f"wrote overlay to {out}")
    sys.exit(0)


@main.command()
@click.argument("script", type=click.Path(exists=True, dir_okay=False))
@click.option("--catalog", "catalog_dir", type=click.Path(exists=True, file_okay=False),
              help="Directory of STL files; preloaded and used to resolve uploads.")
@click.option("--demo-catalog", is_flag=True,
              help="Preload the built-in demo models (matches service sessions).")
@click.option("--uploads", "uploads_dir", type=click.Path(exists=True, file_okay=False),
              help="Directory of STL files used only to resolve upload_model events.")
@guarded
def replay(script, catalog_dir, demo_catalog, uploads_dir):
    """Run a recorded event script and print the final session state."""
    events_raw = json.loads(Path(script).read_text())
    if not isinstance(events_raw, list):
        _fail("script must be a JSON array of events")

    catalog = []
    resolver = None
    if demo_catalog:
        catalog = [sess.CatalogEntry(name, mesh, category)
                   for name, category, mesh in shapes.demo_catalog()]
    if catalog_dir:
        root = Path(catalog_dir)
        for stl_path in sorted(root.glob("*.stl")):
            mesh, _ = _load_mesh(str(stl_path))
            catalog.append(sess.CatalogEntry(stl_path.stem, mesh))

        def resolver(name: str):
            target = root / f"{name}.stl"
            if not target.is_file():
                raise MeshLensError(f"upload references missing model {name!r}")
            return _load_mesh(str(target))[0]

    if uploads_dir:
        uploads_root = Path(uploads_dir)

        def resolver(name: str):
            target = uploads_root / f"{name}.stl"
            if not target.is_file():
                raise MeshLensError(f"upload references missing model {name!r}")
            return _load_mesh(str(target))[0]

    try:
        events = [sess.event_from_dict(e, resolver) for e in events_raw]
    except (KeyError, TypeError, ValueError) as exc:
        _fail(f"bad event in script: {exc}")
    state = sess.replay(sess.SessionConfig(), catalog, events)
    click.echo(json.dumps(sess.state_to_dict(state), indent=2, sort_keys=True))
    sys.exit(0)


@main.command()
@click.option("-o", "--out", required=True, type=click.Path(dir_okay=False),
              help="Marker bitmap to write (PGM).")
@click.option("--pattern-out", type=click.Path(dir_okay=False),
              help="Also write the matching pattern file.")
@click.option("--size", type=int, default=256, show_default=True)
@guarded
def marker(out, pattern_out, size):
    """Export the built-in reference marker for printing and training."""
    Path(out).write_bytes(write_pgm(reference_marker_frame(size)))
    if pattern_out:
        Path(pattern_out).write_text(pattern_to_text(reference_pattern()))
    click.echo(f"wrote marker bitmap to {out}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Start the HTTP service (used by the web UI)."""
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
