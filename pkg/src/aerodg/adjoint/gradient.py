"""Grid partials by central differences and the total design gradient."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog

from ..config import AdjointConfig
from ..exceptions import AdjointError
from ..objectives import Functional, ObjectiveSpec, area, functional_value, objective_partial_dU
from ..parameterization import DesignVector
from ..solver.jacobian import JacobianAssembler
from ..solver.residual import ResidualOperator
from .adjoint import adjoint_solve
from .chain import DesignChain
from .perturbation import PerturbationPlan, check_plan, plan_from_config

logger = structlog.get_logger(__name__)


@dataclass
class GridPartials:
    """Per design variable: dJ/dX dX/dD and lam^T dR/dX dX/dD, for each functional."""
    steps: np.ndarray
    dJ_dX: Dict[Functional, np.ndarray]
    lam_dR_dX: Dict[Functional, np.ndarray]


@dataclass
class DesignGradient:
    values: Dict[Functional, np.ndarray]
    names: List[str] = field(default_factory=list)

    def __getitem__(self, functional: Functional) -> np.ndarray:
        return self.values[Functional(functional)]

    @property
    def objective(self) -> np.ndarray:
        return self.values[Functional.DRAG]

    def constraint_jacobian(self, spec: ObjectiveSpec) -> np.ndarray:
        """Rows of d(c_I)/dD in the order of ``spec.constraints``; c_I = target - value."""
        n = len(self.objective)
        if not spec.constraints:
            return np.zeros((0, n))
        return np.vstack([-self.values[c] for c in spec.constraints])


def _partials_for(
    i: int,
    U: np.ndarray,
    operator: ResidualOperator,
    plan: PerturbationPlan,
    lams: Dict[Functional, np.ndarray],
    functionals: Sequence[Functional],
    chord: float,
) -> Tuple[Dict[Functional, float], Dict[Functional, float]]:
    mesh_p, mesh_m = plan.meshes[i]
    two_h = 2.0 * plan.steps[i]
    dJ: Dict[Functional, float] = {}
    dR: Dict[Functional, float] = {}

    stateful = [f for f in functionals if f.state_dependent]
    if stateful:
        op_p, op_m = operator.with_mesh(mesh_p), operator.with_mesh(mesh_m)
        delta_r = (op_p(U) - op_m(U)) / two_h
    for f in functionals:
        if f.state_dependent:
            dJ[f] = (functional_value(U, op_p, f, chord) - functional_value(U, op_m, f, chord)) / two_h
            lam = lams.get(f)
            dR[f] = float(np.sum(lam * delta_r)) if lam is not None else 0.0
        else:
            dJ[f] = (area(mesh_p) - area(mesh_m)) / two_h
            dR[f] = 0.0
    return dJ, dR


def grid_partials(
    U: np.ndarray,
    operator: ResidualOperator,
    plan: PerturbationPlan,
    lams: Dict[Functional, np.ndarray],
    functionals: Sequence[Functional] = (Functional.DRAG,),
    chord: float = 1.0,
    workers: int = 1,
) -> GridPartials:
    """Central differences of J(U, X) and R(U, X) over each plan step with U frozen.

    ``lams`` supplies the adjoint of every state-dependent functional; the
    residual differences are contracted with it immediately.
    """
    if len(plan.meshes) != len(plan):
        raise AdjointError("perturbation plan has not been checked against a design chain")
    frozen = np.array(U, copy=True)
    frozen.setflags(write=False)

    def work(i: int):
        return _partials_for(i, frozen, operator, plan, lams, functionals, chord)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, range(len(plan))))
    else:
        results = [work(i) for i in range(len(plan))]

    if not np.array_equal(frozen, U):
        raise AdjointError("state changed while evaluating grid partials")
    dJ_dX = {f: np.array([r[0][f] for r in results]) for f in functionals}
    lam_dR = {f: np.array([r[1][f] for r in results]) for f in functionals}
    return GridPartials(steps=plan.steps.copy(), dJ_dX=dJ_dX, lam_dR_dX=lam_dR)


def total_gradient(partials: GridPartials, names: Optional[List[str]] = None) -> DesignGradient:
    """dJ/dD = dJ/dX dX/dD - lam^T dR/dX dX/dD for every functional."""
    values = {}
    for f, dj in partials.dJ_dX.items():
        dr = partials.lam_dR_dX.get(f)
        if dr is None or dr.shape != dj.shape:
            raise AdjointError("grid partial dimensions do not match", details={"functional": f.value})
        values[f] = dj - dr
    return DesignGradient(values=values, names=list(names or []))


@dataclass
class AdjointRun:
    gradient: DesignGradient
    plan: PerturbationPlan
    lams: Dict[Functional, np.ndarray]
    iterations: Dict[Functional, int]


def design_gradient(
    U: np.ndarray,
    operator: ResidualOperator,
    chain: DesignChain,
    D: DesignVector,
    spec: ObjectiveSpec,
    config: AdjointConfig = AdjointConfig(),
    workers: int = 1,
    plan: Optional[PerturbationPlan] = None,
) -> AdjointRun:
    """Adjoint solves for Cd (and Cl when constrained), then the grid partials.

    ``operator`` must live on ``chain.mesh_at(D)``.
    """
    functionals = [Functional.DRAG] + list(spec.constraints)
    stateful = [f for f in functionals if f.state_dependent]
    disc = operator.disc

    jacobian = JacobianAssembler(operator, operator.config.jacobian_step).assemble(U)
    lams: Dict[Functional, np.ndarray] = {}
    iterations: Dict[Functional, int] = {}
    for f in stateful:
        rhs = objective_partial_dU(U, operator, f, spec.chord)
        result = adjoint_solve(jacobian, rhs, operator.config.linear, block=disc.block_size, name=f.value)
        lams[f] = result.lam
        iterations[f] = result.iterations

    if plan is None:
        plan = plan_from_config(D, chain.parameterization.step_scales(), config, chain)
    elif not plan.meshes:
        plan = check_plan(plan, D.values, chain, config.max_halvings)
    partials = grid_partials(U, operator, plan, lams, functionals, spec.chord, workers)
    gradient = total_gradient(partials, D.names)
    logger.info(
        "Design gradient assembled",
        design_variables=len(D),
        grad_norm=float(np.linalg.norm(gradient.objective)),
    )
    return AdjointRun(gradient=gradient, plan=plan, lams=lams, iterations=iterations)
