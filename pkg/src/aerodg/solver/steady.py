"""Implicit pseudo-time marching to a steady state."""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import pandas as pd
import scipy.sparse as sp
import structlog

from ..config import CflConfig, SolverConfig
from ..exceptions import LinearSolverError, PositivityError, SolverDivergenceError
from ..mesh import Mesh
from .discretization import Discretization
from .forces import ForceReport, compute_forces
from .gas import Freestream
from .jacobian import JacobianAssembler
from .limiter import positivity_limit
from .linear import linear_solve
from .residual import ResidualOperator
from .state import check_state, freestream_state

logger = structlog.get_logger(__name__)

MAX_CFL_CUTS = 5
HISTORY_COLUMNS = ["step", "cfl", "residual_l2", "cl", "cd"]


def cfl_growth(ratio: float, theta_min: float = 0.8, theta_max: float = 2.0) -> float:
    """CFL multiplier from the residual ratio ||R_old|| / ||R_new||."""
    if not np.isfinite(ratio):
        return theta_max if ratio > 0 else theta_min
    return float(np.clip(ratio, theta_min, theta_max))


def local_time_steps(operator: ResidualOperator, U: np.ndarray, cfl: float) -> np.ndarray:
    return cfl * operator.disc.geometry.h / operator.wave_speeds(U)


def pseudo_time_matrix(disc: Discretization, dt: np.ndarray) -> sp.csr_matrix:
    """Block diagonal M_e / dt_e with each mass block expanded over the four variables."""
    eye = np.eye(4)
    blocks = [np.kron(disc.mass[e], eye) / dt[e] for e in range(disc.n_elements)]
    return sp.block_diag(blocks, format="csr")


@dataclass
class SteadyResult:
    U: np.ndarray
    converged: bool
    steps: int
    residual: float
    reference: float
    cfl: float
    forces: ForceReport
    history: pd.DataFrame = field(repr=False)

    @property
    def cl(self) -> float:
        return self.forces.cl

    @property
    def cd(self) -> float:
        return self.forces.cd


class SteadySolver:
    """Backward-Euler pseudo-transient continuation with residual-driven CFL growth.

    Each step solves (M/dt + dR/dU) dU = -R(U) by preconditioned GMRES,
    applies the positivity limiter and updates the CFL number from the
    residual ratio. A failed linear solve or limiter halves the CFL and
    retries the step.
    """

    def __init__(self, operator: ResidualOperator, config: SolverConfig = SolverConfig(), chord: float = 1.0) -> None:
        self.operator = operator
        self.config = config
        self.chord = chord
        self.assembler = JacobianAssembler(operator, config.jacobian_step)

    @property
    def disc(self) -> Discretization:
        return self.operator.disc

    def reference_residual(self) -> float:
        """||R|| of the free stream on this mesh, the scale for the relative tolerance."""
        U = freestream_state(self.disc, self.operator.freestream)
        return float(np.linalg.norm(self.operator(U)))

    def _step(self, U: np.ndarray, R: np.ndarray, J: sp.csr_matrix, cfl: float) -> np.ndarray:
        disc, op = self.disc, self.operator
        A = pseudo_time_matrix(disc, local_time_steps(op, U, cfl)) + J
        dU, _ = linear_solve(A, -R.ravel(), self.config.linear, block=disc.block_size)
        U_new, _ = positivity_limit(U + disc.unflatten(dU), disc, op.gamma, self.config.positivity_eps)
        return U_new

    def solve(self, U0: Optional[np.ndarray] = None, cfl: Optional[float] = None) -> SteadyResult:
        config, op, disc = self.config, self.operator, self.disc
        schedule: CflConfig = config.cfl
        U = freestream_state(disc, op.freestream) if U0 is None else check_state(U0, disc)
        U, _ = positivity_limit(U, disc, op.gamma, config.positivity_eps)
        cfl = schedule.initial if cfl is None else cfl

        reference = self.reference_residual()
        target = max(config.tolerance * reference, config.abs_tolerance)
        R = op(U)
        norm = float(np.linalg.norm(R))
        scale = max(norm, reference)
        forces = compute_forces(U, op, self.chord)
        rows: List[dict] = [{"step": 0, "cfl": cfl, "residual_l2": norm, "cl": forces.cl, "cd": forces.cd}]

        step = 0
        J: Optional[sp.csr_matrix] = None
        while norm > target and step < config.max_steps:
            step += 1
            if J is None or (step - 1) % config.jacobian_update_interval == 0:
                J = self.assembler.assemble(U)

            for attempt in range(MAX_CFL_CUTS + 1):
                try:
                    U_new = self._step(U, R, J, cfl)
                    R_new = op(U_new)
                    if not np.all(np.isfinite(R_new)):
                        raise PositivityError("non-finite residual after update")
                    break
                except (LinearSolverError, PositivityError) as exc:
                    if attempt == MAX_CFL_CUTS:
                        raise
                    cfl *= 0.5
                    logger.warning("Pseudo-time step rejected, halving CFL", step=step, cfl=cfl, error=exc.message)

            norm_new = float(np.linalg.norm(R_new))
            if norm_new > config.divergence_factor * scale:
                raise SolverDivergenceError("residual diverged", step=step, residual=norm_new)

            used = cfl
            theta = cfl_growth(norm / norm_new if norm_new > 0 else np.inf, schedule.theta_min, schedule.theta_max)
            cfl = min(cfl * theta, schedule.maximum)
            U, R, norm = U_new, R_new, norm_new
            forces = compute_forces(U, op, self.chord)
            rows.append({"step": step, "cfl": used, "residual_l2": norm, "cl": forces.cl, "cd": forces.cd})
            logger.info("Pseudo-time step", step=step, cfl=used, residual=norm, cl=forces.cl, cd=forces.cd)

        converged = norm <= target
        if not converged:
            logger.warning("Steady solve hit the step cap", steps=step, residual=norm, target=target)
        else:
            logger.info("Steady solve converged", steps=step, residual=norm, cl=forces.cl, cd=forces.cd)
        return SteadyResult(
            U=U,
            converged=converged,
            steps=step,
            residual=norm,
            reference=reference,
            cfl=cfl,
            forces=forces,
            history=pd.DataFrame(rows, columns=HISTORY_COLUMNS),
        )


def steady_solve(
    U0: Optional[np.ndarray],
    mesh: Mesh,
    config: SolverConfig,
    fs: Freestream,
    chord: float = 1.0,
) -> SteadyResult:
    disc = Discretization(mesh, config.scheme, config.quadrature)
    return SteadySolver(ResidualOperator(disc, fs, config), config, chord).solve(U0)
