"""SLSQP: damped BFGS, active-set QP, L1 merit line search."""

from .bfgs import (
    BfgsState,
    bfgs_update
)

from .qp import (
    QpResult,
    qp_solve
)

from .line_search import (
    LineSearchResult,
    line_search,
    merit,
    update_penalty
)

from .slsqp import (
    KktPoint,
    OptimizationProblem,
    OptimizationResult,
    OptimizerState,
    OptimizerStatus,
    Slsqp,
    optimize
)

__all__ = [
    # Hessian
    "BfgsState",
    "bfgs_update",

    # Subproblem
    "QpResult",
    "qp_solve",

    # Globalization
    "LineSearchResult",
    "line_search",
    "merit",
    "update_penalty",

    # Driver loop
    "KktPoint",
    "OptimizationProblem",
    "OptimizationResult",
    "OptimizerState",
    "OptimizerStatus",
    "Slsqp",
    "optimize",
]
