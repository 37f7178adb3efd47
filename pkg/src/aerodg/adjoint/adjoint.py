"""Transposed-Jacobian solves for the adjoint variables."""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
import structlog

from ..config import LinearSolverConfig
from ..exceptions import AdjointError, LinearSolverError
from ..solver.linear import linear_solve

logger = structlog.get_logger(__name__)

ADJOINT_PASSES = 8


@dataclass
class AdjointResult:
    lam: np.ndarray
    iterations: int
    residual: float


def adjoint_solve(
    jacobian: sp.spmatrix,
    rhs: np.ndarray,
    config: LinearSolverConfig = LinearSolverConfig(),
    block: int = 1,
    name: str = "J",
    max_passes: int = ADJOINT_PASSES,
) -> AdjointResult:
    """Solve (dR/dU)^T lam = (dJ/dU)^T to the adjoint tolerance.

    GMRES is restarted from its last iterate up to ``max_passes`` times; the
    final relative residual is at most ``adjoint_tol`` or AdjointError is raised.
    ``rhs`` may carry the state layout; ``lam`` is returned with the same shape.
    """
    shape = np.shape(rhs)
    b = np.asarray(rhs, dtype=float).ravel()
    if not np.any(b):
        return AdjointResult(np.zeros(shape), 0, 0.0)

    lam: Optional[np.ndarray] = None
    iterations, residual = 0, np.inf
    for attempt in range(max(1, max_passes)):
        try:
            # GMRES measures its own residual; later passes aim below the target
            tol = max(config.adjoint_tol * 0.1**attempt, 1e-16)
            lam, info = linear_solve(
                jacobian, b, config, tol=tol, block=block, transpose=True, x0=lam, raise_on_stall=False
            )
        except LinearSolverError as exc:
            raise AdjointError(f"adjoint solve for {name} failed: {exc.message}", details=exc.details) from exc
        iterations += info.iterations
        residual = info.residual
        if residual <= config.adjoint_tol:
            break
        logger.debug("Adjoint pass above tolerance", functional=name, attempt=attempt, residual=residual)
    else:
        raise AdjointError(
            f"adjoint solve for {name} did not reach tolerance",
            details={"residual": residual, "tolerance": config.adjoint_tol, "passes": max_passes},
        )

    assert lam is not None
    logger.info("Adjoint solved", functional=name, iterations=iterations, residual=residual)
    return AdjointResult(lam.reshape(shape), iterations, residual)
