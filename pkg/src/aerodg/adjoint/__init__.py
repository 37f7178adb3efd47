"""Discrete adjoint and finite-difference grid sensitivities."""

from .chain import DesignChain

from .adjoint import (
    AdjointResult,
    adjoint_solve
)

from .perturbation import (
    PerturbationPlan,
    check_plan,
    make_perturbation_plan,
    plan_from_config
)

from .gradient import (
    AdjointRun,
    DesignGradient,
    GridPartials,
    design_gradient,
    grid_partials,
    total_gradient
)

from .report import (
    SensitivityReport,
    sensitivity_report
)

__all__ = [
    # Geometry chain
    "DesignChain",

    # Adjoint solve
    "AdjointResult",
    "adjoint_solve",

    # Perturbations
    "PerturbationPlan",
    "check_plan",
    "make_perturbation_plan",
    "plan_from_config",

    # Gradients
    "AdjointRun",
    "DesignGradient",
    "GridPartials",
    "design_gradient",
    "grid_partials",
    "total_gradient",

    # Reports
    "SensitivityReport",
    "sensitivity_report",
]
