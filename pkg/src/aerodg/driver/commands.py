"""The driver workflows behind each CLI sub-command."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import pandas as pd
import structlog

from ..config import AppSettings, RunConfig
from ..deformation import DeformationReport
from ..exceptions import CheckpointError, MeshTopologyError, OptimizerError
from ..mesh import Mesh, ValidationReport, load_mesh, validate, write_mesh
from ..objectives import Functional
from ..observability import timed
from ..optimizer import OptimizationResult, OptimizerState, OptimizerStatus, optimize
from ..solver import Discretization, Freestream, ResidualOperator, SteadyResult, SteadySolver
from .checkpoint import Checkpoint, latest_checkpoint, load_checkpoint, save_checkpoint
from .gradcheck import GradCheckResult, assert_passed, run_gradcheck
from .outputs import comparison_frame, history_frame, wall_frame, write_solution, write_table
from .pipeline import Pipeline, adjoint_spec

logger = structlog.get_logger(__name__)

FAILED = (OptimizerStatus.LINE_SEARCH_FAILURE, OptimizerStatus.CALLBACK_FAILURE)


def cmd_solve(config: RunConfig, settings: Optional[AppSettings] = None) -> SteadyResult:
    """Steady solve from the free stream on the baseline mesh."""
    mesh = load_mesh(config.mesh)
    disc = Discretization(mesh, config.solver.scheme, config.solver.quadrature)
    operator = ResidualOperator(disc, Freestream.from_config(config.freestream), config.solver)
    with timed("solve", scheme=config.scheme.value):
        result = SteadySolver(operator, config.solver, config.objective.chord).solve()
    write_solution(result, disc, config.output_dir)
    return result


def cmd_adjoint(config: RunConfig, settings: Optional[AppSettings] = None) -> pd.DataFrame:
    """Solve, adjoint and total gradient of Cd, Cl and A at the initial design."""
    pipeline = Pipeline(config, settings)
    spec = adjoint_spec(pipeline)
    baseline = pipeline.solve()
    run = pipeline.gradient(pipeline.design.values, spec)
    gradient = run.gradient
    table = pd.DataFrame({
        "i": np.arange(pipeline.n_design),
        "dJ_dD": gradient[Functional.DRAG],
        "dCl_dD": gradient[Functional.LIFT],
        "dA_dD": gradient[Functional.AREA],
    })
    write_solution(baseline.result, baseline.disc, config.output_dir)
    write_table(table, config.output_dir / "gradient.csv")
    return table


def cmd_grad_check(config: RunConfig, settings: Optional[AppSettings] = None) -> GradCheckResult:
    """Writes the comparison before judging it, so a failing check still leaves its CSV."""
    result = run_gradcheck(config, settings)
    result.write(config.output_dir)
    assert_passed(result)
    return result


def deformation_values(pipeline: Pipeline, fraction: float, values: Optional[List[float]] = None) -> np.ndarray:
    if values:
        return pipeline.design_at(np.asarray(values, dtype=float)).values
    return fraction * pipeline.design.upper


def cmd_deform(
    config: RunConfig,
    settings: Optional[AppSettings] = None,
    fraction: float = 0.25,
    values: Optional[List[float]] = None,
) -> DeformationReport:
    """Deformation-only dry run at ``values`` (default: ``fraction`` of the upper bounds)."""
    pipeline = Pipeline(config, settings)
    D = deformation_values(pipeline, fraction, values)
    with timed("deform", design_variables=len(D)):
        mesh = pipeline.chain.mesh_at(D)
    report = pipeline.morpher.report(mesh)
    write_mesh(mesh, config.output_dir / "deformed.mesh")
    report.write_csv(config.output_dir / "deformation.csv")
    logger.info("Deformation written", max_displacement=report.max_displacement, min_area=report.min_area_after)
    return report


def cmd_validate(config: RunConfig, settings: Optional[AppSettings] = None) -> ValidationReport:
    """Mesh invariants plus the parameterization and morpher setup, without solving."""
    mesh = load_mesh(config.mesh)
    report = validate(mesh)
    rows = [{"kind": i.kind.value, "message": i.message, "element": i.element, "face": i.face} for i in report.issues]
    write_table(pd.DataFrame(rows, columns=["kind", "message", "element", "face"]), config.output_dir / "validation.csv")
    if not report.ok:
        raise MeshTopologyError("mesh validation failed", issues=report.lines())
    Pipeline(config, settings, mesh=mesh)
    logger.info("Configuration valid", mesh=str(config.mesh), elements=mesh.n_elements)
    return report


@dataclass
class OptimizeOutcome:
    result: OptimizationResult
    initial: Dict[str, float]
    final: Dict[str, float]
    total_steps: int
    report: pd.DataFrame = field(repr=False)


def _checkpointer(pipeline: Pipeline, run_dir: Path):
    def on_iteration(state: OptimizerState) -> None:
        accepted = pipeline.accept(state.x)
        objective = pipeline.objective(state.x)
        save_checkpoint(
            run_dir,
            Checkpoint(
                state=state,
                U=accepted.U,
                vertices=accepted.mesh.vertices,
                spec=pipeline.require_spec(),
                objective=objective,
                total_steps=pipeline.total_steps,
            ),
        )

    return on_iteration


def _resume(pipeline: Pipeline, run_dir: Path) -> "tuple[OptimizerState, Dict[str, float]]":
    checkpoint = load_checkpoint(latest_checkpoint(run_dir))
    restored = pipeline.restore(
        checkpoint.state.x, checkpoint.U, checkpoint.spec, checkpoint.objective, checkpoint.total_steps
    )
    if not np.array_equal(restored.mesh.vertices, checkpoint.vertices):
        raise CheckpointError("checkpoint mesh does not match the configured design chain", path=str(run_dir))
    history = checkpoint.state.history
    initial = (
        {key: float(history[0][key]) for key in ("Cd", "Cl", "A")} if history else checkpoint.objective.as_dict()
    )
    logger.info("Resuming optimization", iteration=checkpoint.iteration, run_dir=str(run_dir))
    return checkpoint.state, initial


def _final_outputs(pipeline: Pipeline, run_dir: Path, x: np.ndarray) -> "tuple[Dict[str, float], Mesh]":
    evaluation = pipeline.solve(x)
    final = pipeline.objective(x).as_dict()
    final_dir = run_dir / "final"
    write_solution(evaluation.result, evaluation.disc, final_dir)
    write_mesh(evaluation.mesh, final_dir / "final.mesh")
    write_table(wall_frame(evaluation.mesh), final_dir / "wall.csv")
    design = pipeline.design_at(x)
    write_table(
        pd.DataFrame({"name": design.names, "value": design.values, "lower": design.lower, "upper": design.upper}),
        final_dir / "design.csv",
    )
    return final, evaluation.mesh


def cmd_optimize(
    config: RunConfig,
    settings: Optional[AppSettings] = None,
    resume: Optional[Path] = None,
) -> OptimizeOutcome:
    """Drag minimization with remapped warm starts and per-iteration checkpoints."""
    settings = settings or AppSettings()
    run_dir = Path(resume) if resume is not None else config.output_dir
    pipeline = Pipeline(config, settings)

    state: Optional[OptimizerState] = None
    if resume is not None:
        state, initial = _resume(pipeline, run_dir)
    else:
        pipeline.baseline()
        initial = pipeline.objective(pipeline.design.values).as_dict()

    with timed("optimize", design_variables=pipeline.n_design, warm_start=config.warm_start):
        result = optimize(
            pipeline.problem(),
            config.opt,
            state=state,
            debug=settings.DEBUG,
            on_iteration=_checkpointer(pipeline, run_dir),
        )

    final, _ = _final_outputs(pipeline, run_dir, result.x)
    report = comparison_frame(initial, final)
    write_table(history_frame(result.state.history), run_dir / "history.csv")
    write_table(report, run_dir / "report.csv")
    write_table(
        pd.DataFrame([{
            "status": result.status.value,
            "iterations": result.iterations,
            "total_solver_steps": pipeline.total_steps,
            "warm_start": config.warm_start,
        }]),
        run_dir / "summary.csv",
    )
    outcome = OptimizeOutcome(result, initial, final, pipeline.total_steps, report)
    if result.status in FAILED:
        raise OptimizerError(
            f"optimization stopped: {result.status.value}",
            status=result.status.value,
            details={"iterations": result.iterations, "run_dir": str(run_dir)},
        )
    return outcome
