"""Steady 2D Euler solver: FV1, FV2, DGp1 and DGp2 discretizations."""

from .gas import (
    N_VARS,
    Freestream,
    conservative_from_primitive,
    euler_flux,
    pressure,
    primitive_from_conservative
)

from .riemann import (
    hllc_flux,
    llf_flux,
    riemann_flux
)

from .basis import (
    TaylorBasis,
    taylor_basis_eval
)

from .discretization import Discretization

from .reconstruction import (
    GreenGaussReconstruction,
    reconstruct_fv2
)

from .viscosity import (
    av_coefficients,
    modal_decay_gate
)

from .residual import (
    FrozenTerms,
    ResidualOperator,
    residual
)

from .limiter import positivity_limit

from .jacobian import (
    JacobianAssembler,
    assemble_jacobian
)

from .linear import (
    LinearSolveInfo,
    linear_solve
)

from .state import (
    freestream_state,
    project
)

from .forces import (
    ForceReport,
    compute_forces,
    rotate_forces
)

from .steady import (
    SteadyResult,
    SteadySolver,
    cfl_growth,
    steady_solve
)

from .remap import remap_solution

__all__ = [
    # Gas model
    "N_VARS",
    "Freestream",
    "conservative_from_primitive",
    "euler_flux",
    "pressure",
    "primitive_from_conservative",

    # Fluxes
    "hllc_flux",
    "llf_flux",
    "riemann_flux",

    # Discretization
    "TaylorBasis",
    "taylor_basis_eval",
    "Discretization",
    "GreenGaussReconstruction",
    "reconstruct_fv2",

    # Residual and linearization
    "av_coefficients",
    "modal_decay_gate",
    "FrozenTerms",
    "ResidualOperator",
    "residual",
    "positivity_limit",
    "JacobianAssembler",
    "assemble_jacobian",
    "LinearSolveInfo",
    "linear_solve",

    # Steady solve
    "freestream_state",
    "project",
    "ForceReport",
    "compute_forces",
    "rotate_forces",
    "SteadyResult",
    "SteadySolver",
    "cfl_growth",
    "steady_solve",
    "remap_solution",
]
