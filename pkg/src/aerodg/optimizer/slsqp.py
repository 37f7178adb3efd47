"""Sequential quadratic programming with a damped BFGS Hessian."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
import structlog

from ..config import OptimizerConfig
from ..exceptions import AeroDGError, OptimizerError
from .bfgs import BfgsState, bfgs_update
from .line_search import Values, line_search, merit, update_penalty, violation
from .qp import QpResult, qp_solve

logger = structlog.get_logger(__name__)

Gradients = Tuple[np.ndarray, np.ndarray, np.ndarray]


class OptimizerStatus(str, Enum):
    RUNNING = "running"
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"
    LINE_SEARCH_FAILURE = "line_search_failure"
    CALLBACK_FAILURE = "callback_failure"


@dataclass
class OptimizationProblem:
    """min f(x) s.t. c_eq(x) = 0, c_in(x) <= 0, lower <= x <= upper.

    ``values(x)`` returns (f, c_eq, c_in); ``gradients(x)`` returns
    (grad f, J_eq, J_in) and is only called at points where ``values`` was
    just evaluated.
    """
    values: Callable[[np.ndarray], Values]
    gradients: Callable[[np.ndarray], Gradients]
    x0: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    describe: Optional[Callable[[np.ndarray], Dict[str, float]]] = None

    def __post_init__(self) -> None:
        self.x0 = np.asarray(self.x0, dtype=float)
        n = len(self.x0)
        self.lower = np.full(n, -np.inf) if self.lower is None else np.asarray(self.lower, dtype=float)
        self.upper = np.full(n, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float)
        if self.lower.shape != (n,) or self.upper.shape != (n,):
            raise OptimizerError("bounds do not match the number of variables", status="invalid_problem")
        if np.any(self.lower > self.upper):
            raise OptimizerError("lower bound exceeds upper bound", status="invalid_problem")

    @property
    def n(self) -> int:
        return len(self.x0)

    @classmethod
    def from_functions(
        cls,
        fun: Callable[[np.ndarray], float],
        grad: Callable[[np.ndarray], np.ndarray],
        x0: np.ndarray,
        lower: Optional[np.ndarray] = None,
        upper: Optional[np.ndarray] = None,
        eq: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        eq_jac: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        ineq: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        ineq_jac: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    ) -> "OptimizationProblem":
        n = len(np.atleast_1d(x0))

        def values(x: np.ndarray) -> Values:
            c_eq = np.atleast_1d(eq(x)) if eq else np.zeros(0)
            c_in = np.atleast_1d(ineq(x)) if ineq else np.zeros(0)
            return float(fun(x)), np.asarray(c_eq, dtype=float), np.asarray(c_in, dtype=float)

        def gradients(x: np.ndarray) -> Gradients:
            J_eq = np.atleast_2d(eq_jac(x)) if eq else np.zeros((0, n))
            J_in = np.atleast_2d(ineq_jac(x)) if ineq else np.zeros((0, n))
            return np.asarray(grad(x), dtype=float), J_eq.reshape(-1, n), J_in.reshape(-1, n)

        return cls(values=values, gradients=gradients, x0=np.atleast_1d(x0), lower=lower, upper=upper)


@dataclass
class KktPoint:
    iteration: int
    x: np.ndarray
    mu_eq: np.ndarray
    mu_in: np.ndarray
    kkt_norm: float
    feasibility: float


@dataclass
class OptimizerState:
    """Everything needed to continue the iteration from x_k."""
    iteration: int
    x: np.ndarray
    f: float
    c_eq: np.ndarray
    c_in: np.ndarray
    g: np.ndarray
    J_eq: np.ndarray
    J_in: np.ndarray
    B: np.ndarray
    rho: float
    tolerance: float
    mu_eq: np.ndarray = field(default_factory=lambda: np.zeros(0))
    mu_in: np.ndarray = field(default_factory=lambda: np.zeros(0))
    history: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def feasibility(self) -> float:
        return violation(self.c_eq, self.c_in)

    def arrays(self) -> Dict[str, np.ndarray]:
        return {
            "iteration": np.array(self.iteration),
            "x": self.x,
            "f": np.array(self.f),
            "c_eq": self.c_eq,
            "c_in": self.c_in,
            "g": self.g,
            "J_eq": self.J_eq,
            "J_in": self.J_in,
            "B": self.B,
            "rho": np.array(self.rho),
            "tolerance": np.array(self.tolerance),
            "mu_eq": self.mu_eq,
            "mu_in": self.mu_in,
        }

    @classmethod
    def from_arrays(cls, data: Dict[str, np.ndarray], history: Optional[List[Dict[str, Any]]] = None) -> "OptimizerState":
        return cls(
            iteration=int(data["iteration"]),
            x=np.asarray(data["x"], dtype=float),
            f=float(data["f"]),
            c_eq=np.asarray(data["c_eq"], dtype=float),
            c_in=np.asarray(data["c_in"], dtype=float),
            g=np.asarray(data["g"], dtype=float),
            J_eq=np.asarray(data["J_eq"], dtype=float),
            J_in=np.asarray(data["J_in"], dtype=float),
            B=np.asarray(data["B"], dtype=float),
            rho=float(data["rho"]),
            tolerance=float(data["tolerance"]),
            mu_eq=np.asarray(data.get("mu_eq", np.zeros(0)), dtype=float),
            mu_in=np.asarray(data.get("mu_in", np.zeros(0)), dtype=float),
            history=list(history or []),
        )


@dataclass
class OptimizationResult:
    x: np.ndarray
    f: float
    status: OptimizerStatus
    iterations: int
    state: OptimizerState
    points: List[KktPoint]
    history: pd.DataFrame = field(repr=False)

    @property
    def success(self) -> bool:
        return self.status is OptimizerStatus.CONVERGED


def lagrangian_gradient(g: np.ndarray, J_eq: np.ndarray, J_in: np.ndarray, qp: QpResult) -> np.ndarray:
    return g - J_eq.T @ qp.mu_eq + J_in.T @ qp.mu_in - qp.mu_lower + qp.mu_upper


def kkt_norm(state: OptimizerState, qp: QpResult) -> float:
    """Stationarity of the Lagrangian plus complementarity, with the QP multipliers."""
    stationarity = float(np.abs(lagrangian_gradient(state.g, state.J_eq, state.J_in, qp)).max(initial=0.0))
    complementarity = float(np.abs(qp.mu_in @ state.c_in)) if len(state.c_in) else 0.0
    return stationarity + complementarity


class Slsqp:
    """QP step, L1-merit backtracking, damped BFGS update; repeated until KKT."""

    def __init__(
        self,
        problem: OptimizationProblem,
        config: OptimizerConfig = OptimizerConfig(),
        debug: bool = False,
        on_iteration: Optional[Callable[[OptimizerState], None]] = None,
    ) -> None:
        self.problem = problem
        self.config = config
        self.debug = debug
        self.on_iteration = on_iteration

    def start(self) -> OptimizerState:
        p = self.problem
        x = np.clip(p.x0, p.lower, p.upper)
        f, c_eq, c_in = p.values(x)
        g, J_eq, J_in = p.gradients(x)
        g_norm = float(np.abs(g).max(initial=0.0))
        tolerance = max(self.config.kkt_tol, self.config.noise_floor_ratio * g_norm)
        state = OptimizerState(
            iteration=0,
            x=x,
            f=f,
            c_eq=np.asarray(c_eq, dtype=float),
            c_in=np.asarray(c_in, dtype=float),
            g=np.asarray(g, dtype=float),
            J_eq=np.asarray(J_eq, dtype=float).reshape(-1, p.n),
            J_in=np.asarray(J_in, dtype=float).reshape(-1, p.n),
            B=BfgsState.initial(p.n, float(np.linalg.norm(g))).B,
            rho=0.0,
            tolerance=tolerance,
        )
        if self.on_iteration:
            self.on_iteration(state)
        return state

    def _subproblem(self, state: OptimizerState) -> QpResult:
        p = self.problem
        return qp_solve(
            state.g,
            state.B,
            state.J_eq,
            state.c_eq,
            state.J_in,
            state.c_in,
            p.lower - state.x,
            p.upper - state.x,
            max_iter=self.config.qp_max_iter,
        )

    def _row(self, state: OptimizerState, kkt: float, alpha: float, qp: QpResult) -> Dict[str, Any]:
        row: Dict[str, Any] = {
            "iter": state.iteration,
            "objective": state.f,
            "feasibility": state.feasibility,
            "kkt_norm": kkt,
            "merit": merit(state.f, state.c_eq, state.c_in, state.rho),
            "alpha": alpha,
            "rho": state.rho,
            "relaxed": bool(qp.relaxed),
        }
        if self.problem.describe is not None:
            row.update(self.problem.describe(state.x))
        return row

    def run(self, state: Optional[OptimizerState] = None) -> OptimizationResult:
        config, p = self.config, self.problem
        state = self.start() if state is None else state
        points: List[KktPoint] = []
        best: Optional[Tuple[float, np.ndarray]] = None
        status = OptimizerStatus.RUNNING

        while True:
            if state.feasibility <= config.feasibility_tol and (best is None or state.f < best[0]):
                best = (state.f, state.x.copy())
            qp = self._subproblem(state)
            kkt = kkt_norm(state, qp)
            points.append(KktPoint(state.iteration, state.x.copy(), qp.mu_eq, qp.mu_in, kkt, state.feasibility))

            if kkt <= state.tolerance and state.feasibility <= config.feasibility_tol:
                state.history.append(self._row(state, kkt, 0.0, qp))
                status = OptimizerStatus.CONVERGED
                break
            if state.iteration >= config.max_iter:
                state.history.append(self._row(state, kkt, 0.0, qp))
                status = OptimizerStatus.MAX_ITERATIONS
                break

            state.rho = update_penalty(state.rho, qp.max_multiplier, config.merit_rho_margin)
            search = line_search(
                p.values,
                state.x,
                qp.d,
                (state.f, state.c_eq, state.c_in),
                state.g,
                state.rho,
                config.armijo,
                config.max_backtracks,
            )
            state.history.append(self._row(state, kkt, search.alpha, qp))
            logger.info(
                "Optimizer iteration",
                iteration=state.iteration,
                objective=state.f,
                merit=search.merit,
                kkt_norm=kkt,
                alpha=search.alpha,
            )
            if not search.success:
                status = OptimizerStatus.LINE_SEARCH_FAILURE
                break

            x_new = state.x + search.alpha * qp.d
            try:
                g, J_eq, J_in = p.gradients(x_new)
            except AeroDGError as exc:
                logger.error("Gradient evaluation failed", iteration=state.iteration, error_code=exc.error_code)
                status = OptimizerStatus.CALLBACK_FAILURE
                break
            J_eq = np.asarray(J_eq, dtype=float).reshape(-1, p.n)
            J_in = np.asarray(J_in, dtype=float).reshape(-1, p.n)

            s = x_new - state.x
            y = lagrangian_gradient(g, J_eq, J_in, qp) - lagrangian_gradient(state.g, state.J_eq, state.J_in, qp)
            B = bfgs_update(BfgsState(state.B), s, y).B if np.any(s) else state.B
            if self.debug:
                check = BfgsState(B)
                if not check.is_positive_definite():
                    raise OptimizerError(
                        "BFGS matrix lost positive definiteness",
                        status="bfgs_indefinite",
                        details={"min_eigenvalue": check.min_eigenvalue()},
                    )

            f, c_eq, c_in = search.values
            state = OptimizerState(
                iteration=state.iteration + 1,
                x=x_new,
                f=float(f),
                c_eq=c_eq,
                c_in=c_in,
                g=np.asarray(g, dtype=float),
                J_eq=J_eq,
                J_in=J_in,
                B=B,
                rho=state.rho,
                tolerance=state.tolerance,
                mu_eq=qp.mu_eq,
                mu_in=qp.mu_in,
                history=state.history,
            )
            if self.on_iteration:
                self.on_iteration(state)

        x, f = state.x, state.f
        if status in (OptimizerStatus.LINE_SEARCH_FAILURE, OptimizerStatus.CALLBACK_FAILURE) and best is not None:
            f, x = best
        logger.info("Optimizer finished", status=status.value, iterations=state.iteration, objective=f)
        return OptimizationResult(
            x=x,
            f=f,
            status=status,
            iterations=state.iteration,
            state=state,
            points=points,
            history=pd.DataFrame(state.history),
        )


def optimize(
    problem: OptimizationProblem,
    config: OptimizerConfig = OptimizerConfig(),
    state: Optional[OptimizerState] = None,
    debug: bool = False,
    on_iteration: Optional[Callable[[OptimizerState], None]] = None,
) -> OptimizationResult:
    return Slsqp(problem, config, debug, on_iteration).run(state)
