"""Design vector to flow solution to objective and gradient, with remapped warm starts."""

from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np
import pandas as pd
import structlog

from ..adjoint import AdjointRun, DesignChain, design_gradient
from ..config import AppSettings, ObjectiveConfig, RunConfig, SolverConfig
from ..deformation import MeshMorpher
from ..exceptions import AeroDGError, ConfigError, EmbeddingError, ParameterizationError
from ..mesh import Mesh, load_mesh
from ..objectives import ObjectiveSpec, ObjectiveValues, objective_value
from ..observability import timed
from ..optimizer import OptimizationProblem
from ..parameterization import DesignVector, build_parameterization
from ..solver import (
    Discretization,
    Freestream,
    ResidualOperator,
    SteadyResult,
    SteadySolver,
    compute_forces,
    remap_solution,
)
from ..solver.steady import HISTORY_COLUMNS

logger = structlog.get_logger(__name__)


@dataclass
class Evaluation:
    """Converged flow at one design point."""
    values: np.ndarray
    mesh: Mesh
    operator: ResidualOperator
    result: SteadyResult
    warm: bool

    @property
    def U(self) -> np.ndarray:
        return self.result.U

    @property
    def disc(self) -> Discretization:
        return self.operator.disc


class Pipeline:
    """X(D), U(X) and the functionals for one run configuration.

    The last accepted evaluation (the anchor) seeds every new solve through
    ``remap_solution``; a remap or warm solve that fails falls back to the
    free stream.
    """

    def __init__(
        self,
        config: RunConfig,
        settings: Optional[AppSettings] = None,
        solver: Optional[SolverConfig] = None,
        mesh: Optional[Mesh] = None,
    ) -> None:
        self.config = config
        self.settings = settings or AppSettings()
        self.solver_config = solver or config.solver
        self.freestream = Freestream.from_config(config.freestream)
        with timed("setup", mesh=str(config.mesh)):
            self.mesh = mesh if mesh is not None else load_mesh(config.mesh)
            try:
                self.parameterization = build_parameterization(self.mesh, config.parameterization)
            except (ParameterizationError, EmbeddingError) as exc:
                raise ConfigError(
                    f"parameterization does not fit the mesh: {exc.message}",
                    key="parameterization",
                    details=dict(exc.details),
                ) from exc
            self.morpher = MeshMorpher(self.mesh, config.rbf)
            self.chain = DesignChain(self.mesh, self.parameterization, self.morpher)
        self.design = self.parameterization.initial()
        self.spec: Optional[ObjectiveSpec] = None
        self.total_steps = 0
        self.anchor: Optional[Evaluation] = None
        self._last: Optional[Evaluation] = None
        self._objectives: Dict[bytes, ObjectiveValues] = {}

    @property
    def n_design(self) -> int:
        return self.chain.n_design

    def design_at(self, values: np.ndarray) -> DesignVector:
        return self.design.with_values(values)

    def operator_for(self, mesh: Mesh) -> ResidualOperator:
        disc = Discretization(mesh, self.solver_config.scheme, self.solver_config.quadrature)
        return ResidualOperator(disc, self.freestream, self.solver_config)

    def _warm_state(self, operator: ResidualOperator) -> Optional[np.ndarray]:
        if not self.config.warm_start or self.anchor is None:
            return None
        try:
            return remap_solution(
                self.anchor.U,
                self.anchor.disc,
                operator.disc,
                self.freestream.gamma,
                self.solver_config.positivity_eps,
            )
        except AeroDGError as exc:
            logger.warning("Remap failed, cold start", error_code=exc.error_code)
            return None

    def solve(self, values: Optional[np.ndarray] = None) -> Evaluation:
        """Converged flow at ``values`` (baseline when omitted); repeated points are cached."""
        values = self.design.values if values is None else np.asarray(values, dtype=float)
        if self._last is not None and np.array_equal(self._last.values, values):
            return self._last

        with timed("deform"):
            mesh = self.chain.mesh_at(values)
        operator = self.operator_for(mesh)
        solver = SteadySolver(operator, self.solver_config, self.config.objective.chord)
        U0 = self._warm_state(operator)
        with timed("solve", scheme=self.solver_config.scheme.value, warm=U0 is not None):
            if U0 is None:
                result = solver.solve()
            else:
                try:
                    result = solver.solve(U0)
                except AeroDGError as exc:
                    logger.warning("Warm-started solve failed, cold start", error_code=exc.error_code)
                    U0 = None
                    result = solver.solve()
        self.total_steps += result.steps
        evaluation = Evaluation(values=values.copy(), mesh=mesh, operator=operator, result=result, warm=U0 is not None)
        self._last = evaluation
        return evaluation

    def baseline(self) -> Evaluation:
        """Solve at the initial design, fix the constraint targets and anchor warm starts there."""
        evaluation = self.solve(self.design.values)
        objective = self.config.objective
        self.spec = ObjectiveSpec.capture(evaluation.result.cl, evaluation.mesh, objective)
        self.anchor = evaluation
        logger.info("Baseline captured", cl0=self.spec.cl0, area0=self.spec.area0, cd0=evaluation.result.cd)
        return evaluation

    def require_spec(self) -> ObjectiveSpec:
        if self.spec is None:
            self.baseline()
        assert self.spec is not None
        return self.spec

    def objective(self, values: np.ndarray) -> ObjectiveValues:
        spec = self.require_spec()
        evaluation = self.solve(values)
        result = objective_value(evaluation.U, evaluation.operator, spec)
        self._objectives[np.asarray(values, dtype=float).tobytes()] = result
        return result

    def gradient(self, values: np.ndarray, spec: Optional[ObjectiveSpec] = None) -> AdjointRun:
        spec = spec or self.require_spec()
        evaluation = self.solve(values)
        with timed("adjoint", design_variables=self.n_design):
            return design_gradient(
                evaluation.U,
                evaluation.operator,
                self.chain,
                self.design_at(values),
                spec,
                self.config.adjoint,
                self.settings.WORKERS,
            )

    def accept(self, values: np.ndarray) -> Evaluation:
        """Make the converged flow at ``values`` the warm-start anchor."""
        self.anchor = self.solve(values)
        return self.anchor

    def restore(self, values: np.ndarray, U: np.ndarray, spec: ObjectiveSpec, objective: ObjectiveValues, total_steps: int) -> Evaluation:
        """Reinstate an accepted point from a checkpoint without re-solving."""
        values = np.asarray(values, dtype=float)
        mesh = self.chain.mesh_at(values)
        operator = self.operator_for(mesh)
        U = np.asarray(U, dtype=float).reshape(operator.disc.shape)
        forces = compute_forces(U, operator, spec.chord)
        result = SteadyResult(
            U=U,
            converged=True,
            steps=0,
            residual=float(np.linalg.norm(operator(U))),
            reference=np.nan,
            cfl=self.solver_config.cfl.initial,
            forces=forces,
            history=pd.DataFrame(columns=HISTORY_COLUMNS),
        )
        evaluation = Evaluation(values=values.copy(), mesh=mesh, operator=operator, result=result, warm=False)
        self.spec = spec
        self.total_steps = total_steps
        self.anchor = self._last = evaluation
        self._objectives[values.tobytes()] = objective
        logger.info("Run restored", design_variables=len(values), total_steps=total_steps)
        return evaluation

    def describe(self, values: np.ndarray) -> Dict[str, float]:
        found = self._objectives.get(np.asarray(values, dtype=float).tobytes())
        row: Dict[str, float] = found.as_dict() if found else {"Cd": np.nan, "Cl": np.nan, "A": np.nan}
        row["solver_steps"] = self.total_steps
        return row

    def problem(self, x0: Optional[np.ndarray] = None) -> OptimizationProblem:
        """Minimize Cd with c_I = target - value <= 0 for the enabled constraints."""
        spec = self.require_spec()

        def values(x: np.ndarray):
            result = self.objective(x)
            return result.cd, np.zeros(0), result.constraints

        def gradients(x: np.ndarray):
            run = self.gradient(x, spec)
            return run.gradient.objective, np.zeros((0, len(x))), run.gradient.constraint_jacobian(spec)

        return OptimizationProblem(
            values=values,
            gradients=gradients,
            x0=self.design.values if x0 is None else x0,
            lower=self.design.lower,
            upper=self.design.upper,
            describe=self.describe,
        )


def adjoint_spec(pipeline: Pipeline) -> ObjectiveSpec:
    """Spec with both constraint functionals enabled, so every gradient is computed."""
    baseline = pipeline.solve(pipeline.design.values)
    config = ObjectiveConfig(lift_constraint=True, area_constraint=True, chord=pipeline.config.objective.chord)
    return ObjectiveSpec.capture(baseline.result.cl, baseline.mesh, config)
