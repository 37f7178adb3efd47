"""Preconditioned restarted GMRES for the block-sparse systems."""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
import structlog

from ..config import LinearSolverConfig, Preconditioner
from ..exceptions import LinearSolverError

logger = structlog.get_logger(__name__)


@dataclass
class LinearSolveInfo:
    iterations: int
    residual: float
    preconditioner: str


class _Counter:
    def __init__(self) -> None:
        self.niter = 0

    def __call__(self, _: object) -> None:
        self.niter += 1


def block_jacobi(A: sp.spmatrix, block: int) -> spla.LinearOperator:
    """Inverse of the diagonal blocks as a preconditioner."""
    n = A.shape[0]
    if n % block:
        raise ValueError("matrix size is not a multiple of the block size")
    nb = n // block
    csr = A.tocsr()
    idx = np.arange(n).reshape(nb, block)
    blocks = np.stack([csr[i][:, i].toarray() for i in idx]) if nb else np.zeros((0, block, block))
    try:
        inv = np.linalg.inv(blocks)
    except np.linalg.LinAlgError as exc:
        raise LinearSolverError(f"singular diagonal block: {exc}") from exc

    def apply(x: np.ndarray) -> np.ndarray:
        return np.einsum("bij,bj->bi", inv, x.reshape(nb, block)).ravel()

    return spla.LinearOperator(A.shape, matvec=apply, dtype=float)


def build_preconditioner(
    A: sp.spmatrix,
    config: LinearSolverConfig,
    block: int = 1,
) -> Optional[spla.LinearOperator]:
    kind = config.preconditioner
    if kind is Preconditioner.NONE:
        return None
    if kind is Preconditioner.ILU:
        try:
            ilu = spla.spilu(sp.csc_matrix(A), drop_tol=config.ilu_drop_tol, fill_factor=config.ilu_fill_factor)
        except RuntimeError as exc:
            logger.warning("ILU factorization failed, using block Jacobi", error=str(exc))
            return block_jacobi(A, block)
        return spla.LinearOperator(A.shape, matvec=ilu.solve, dtype=float)
    return block_jacobi(A, block)


def linear_solve(
    A: sp.spmatrix,
    b: np.ndarray,
    config: LinearSolverConfig = LinearSolverConfig(),
    tol: Optional[float] = None,
    block: int = 1,
    transpose: bool = False,
    x0: Optional[np.ndarray] = None,
    raise_on_stall: bool = True,
) -> "tuple[np.ndarray, LinearSolveInfo]":
    """Solve A x = b (or A^T x = b) to relative residual ``tol``.

    With ``raise_on_stall`` off, an unconverged iterate is returned for the
    caller to restart from; breakdowns still raise.
    """
    A = sp.csr_matrix(A.T) if transpose else sp.csr_matrix(A)
    b = np.asarray(b, dtype=float)
    tol = config.inner_tol if tol is None else tol
    norm_b = float(np.linalg.norm(b))
    if norm_b == 0.0:
        return np.zeros_like(b), LinearSolveInfo(0, 0.0, config.preconditioner.value)

    M = build_preconditioner(A, config, block)
    counter = _Counter()
    x, info = spla.gmres(
        A,
        b,
        x0=x0,
        rtol=tol,
        atol=0.0,
        restart=config.restart,
        maxiter=config.maxiter,
        M=M,
        callback=counter,
        callback_type="pr_norm",
    )
    rel = float(np.linalg.norm(b - A @ x)) / norm_b
    if info < 0 or not np.all(np.isfinite(x)):
        raise LinearSolverError("GMRES breakdown", iterations=counter.niter, residual=rel)
    if raise_on_stall and info > 0 and rel > 10.0 * tol:
        raise LinearSolverError(
            "GMRES did not reach the requested tolerance",
            iterations=counter.niter,
            residual=rel,
        )
    logger.debug("Linear solve finished", iterations=counter.niter, residual=rel, transpose=transpose)
    return x, LinearSolveInfo(counter.niter, rel, config.preconditioner.value)
