"""Unstructured 2D meshes: topology, geometry, validation and file IO."""

from .mesh import (
    BoundaryPatch,
    Mesh,
    PatchTag,
    wall_loops
)

from .geometry import (
    ElementGeometry,
    MeshGeometry,
    compute_geometry,
    element_geometry
)

from .validation import (
    IssueKind,
    ValidationIssue,
    ValidationReport,
    validate
)

from .io import (
    load_mesh,
    parse_mesh,
    write_mesh
)

from . import builders

__all__ = [
    # Topology
    "BoundaryPatch",
    "Mesh",
    "PatchTag",
    "wall_loops",

    # Geometry
    "ElementGeometry",
    "MeshGeometry",
    "compute_geometry",
    "element_geometry",

    # Validation
    "IssueKind",
    "ValidationIssue",
    "ValidationReport",
    "validate",

    # File IO
    "load_mesh",
    "parse_mesh",
    "write_mesh",
    "builders",
]
