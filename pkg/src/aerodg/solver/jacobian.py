"""Block-sparse dR/dU by colored forward differences."""

from typing import List, Optional

import numpy as np
import scipy.sparse as sp
import structlog

from ..config import Scheme
from ..exceptions import AeroDGError
from .residual import FrozenTerms, ResidualOperator

logger = structlog.get_logger(__name__)


def greedy_coloring(affected: List[np.ndarray]) -> np.ndarray:
    """Colors such that no two same-colored elements perturb a common residual row.

    ``affected[e]`` lists the rows influenced by element e; the relation is
    assumed symmetric.
    """
    n = len(affected)
    colors = np.full(n, -1, dtype=np.int64)
    for e in range(n):
        rows = affected[e]
        conflict = np.unique(np.concatenate([affected[r] for r in rows]))
        used = set(colors[conflict][colors[conflict] >= 0].tolist())
        c = 0
        while c in used:
            c += 1
        colors[e] = c
    return colors


class JacobianAssembler:
    """Reusable sparsity pattern and coloring for one residual operator.

    Each element's rows depend on itself and its face neighbours (two rings
    for FV2, whose gradients reach one element further). Artificial viscosity
    and slope limiter factors are frozen at the linearization state.
    """

    def __init__(self, operator: ResidualOperator, step: float = 1e-7) -> None:
        self.operator = operator
        self.step = step
        disc = operator.disc
        rings = 2 if disc.scheme is Scheme.FV2 else 1
        self.stencils = disc.stencil(rings)
        self.colors = greedy_coloring(self.stencils)
        self.n_colors = int(self.colors.max()) + 1 if len(self.colors) else 0
        self.block = disc.block_size

        cols = np.concatenate([np.full(len(s), e, dtype=np.int64) for e, s in enumerate(self.stencils)])
        rows = np.concatenate(self.stencils)
        self.pair_col, self.pair_row = cols, rows
        self.pairs_by_color = [np.flatnonzero(self.colors[cols] == c) for c in range(self.n_colors)]

        b = self.block
        a = np.arange(b)
        shape = (len(rows), b, b)
        self._rows = np.broadcast_to(rows[:, None, None] * b + a[None, :, None], shape).ravel()
        self._cols = np.broadcast_to(cols[:, None, None] * b + a[None, None, :], shape).ravel()
        logger.debug(
            "Jacobian pattern built",
            elements=disc.n_elements,
            colors=self.n_colors,
            blocks=len(rows),
        )

    @property
    def evaluations(self) -> int:
        return self.n_colors * self.block

    def assemble(self, U: np.ndarray, frozen: Optional[FrozenTerms] = None) -> sp.csr_matrix:
        op = self.operator
        disc = op.disc
        frozen = frozen if frozen is not None else op.freeze(U)
        R0 = op(U, frozen)
        b = self.block
        nk = disc.n_basis
        data = np.zeros((len(self.pair_row), b, b))

        for c in range(self.n_colors):
            members = np.flatnonzero(self.colors == c)
            pairs = self.pairs_by_color[c]
            for j in range(b):
                k, m = divmod(j, 4)
                h = self.step * (1.0 + np.abs(U[members, k, m]))
                Up = U.copy()
                Up[members, k, m] += h
                dR = op(Up, frozen) - R0
                if not np.all(np.isfinite(dR)):
                    raise AeroDGError(
                        "residual evaluation failed during Jacobian perturbation",
                        error_code="jacobian_failed",
                        exit_code=3,
                        details={"color": c, "column": j},
                    )
                inv_h = np.zeros(disc.n_elements)
                inv_h[members] = 1.0 / h
                data[pairs, :, j] = dR[self.pair_row[pairs]].reshape(len(pairs), nk * 4) * inv_h[
                    self.pair_col[pairs]
                ][:, None]

        n = disc.n_dofs
        return sp.csr_matrix((data.ravel(), (self._rows, self._cols)), shape=(n, n))


def assemble_jacobian(U: np.ndarray, operator: ResidualOperator, step: float = 1e-7) -> sp.csr_matrix:
    return JacobianAssembler(operator, step).assemble(U)
