"""RBF mesh deformation."""

from .rbf import (
    RbfSystem,
    rbf_apply,
    rbf_factor,
    rbf_kernel,
    rbf_solve
)

from .morph import (
    DeformationReport,
    MeshMorpher,
    deform_mesh
)

__all__ = [
    "RbfSystem",
    "rbf_apply",
    "rbf_factor",
    "rbf_kernel",
    "rbf_solve",
    "DeformationReport",
    "MeshMorpher",
    "deform_mesh",
]
