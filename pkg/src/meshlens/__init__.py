"""meshlens: print-readiness mesh checks plus marker-driven AR preview.

The package splits into a mesh side (STL parsing, welding, printability
analysis) and a vision side (marker detection, pose, overlay rendering),
glued together by an interactive session model and exposed through a CLI
and a small HTTP service.
"""

from .analysis import (
    BoundaryLoop,
    EdgeReport,
    ModelTransform,
    PrintabilityReport,
    analyze,
    fit_transform,
)
from .errors import MeshLensError
from .image import Frame, read_pgm, read_ppm, rgb_to_gray, write_pgm, write_ppm
from .stl import (
    EmptyModel,
    IndexedMesh,
    NonFiniteCoordinate,
    SourceFormat,
    StlError,
    StlSyntaxError,
    TooManyFacets,
    TriangleSoup,
    TruncatedFile,
    parse_stl,
    weld_vertices,
    write_stl,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryLoop",
    "EdgeReport",
    "EmptyModel",
    "Frame",
    "IndexedMesh",
    "MeshLensError",
    "ModelTransform",
    "NonFiniteCoordinate",
    "PrintabilityReport",
    "SourceFormat",
    "StlError",
    "StlSyntaxError",
    "TooManyFacets",
    "TriangleSoup",
    "TruncatedFile",
    "analyze",
    "fit_transform",
    "parse_stl",
    "read_pgm",
    "read_ppm",
    "rgb_to_gray",
    "weld_vertices",
    "write_pgm",
    "write_ppm",
    "write_stl",
    "__version__",
]
