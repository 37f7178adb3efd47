"""Adjoint gradient against central differences of the full nonlinear pipeline."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import pandas as pd
import structlog

from ..adjoint import SensitivityReport, sensitivity_report
from ..config import AppSettings, GradCheckConfig, RunConfig, Scheme
from ..exceptions import GradientCheckError
from ..observability import timed
from .outputs import write_table
from .pipeline import Pipeline

logger = structlog.get_logger(__name__)

GRADCHECK_COLUMNS = ["i", "adjoint_grad", "fd_grad", "rel_err"]


@dataclass
class GradCheckResult:
    table: pd.DataFrame
    tolerance: float
    checked: np.ndarray
    sensitivity: Optional[SensitivityReport] = field(default=None, repr=False)

    @property
    def failed(self) -> List[int]:
        bad = self.checked & ~(self.table["rel_err"].to_numpy() <= self.tolerance)
        return [int(i) for i in np.flatnonzero(bad)]

    @property
    def passed(self) -> bool:
        return not self.failed

    @property
    def max_rel_err(self) -> float:
        errors = self.table["rel_err"].to_numpy()[self.checked]
        return float(errors.max(initial=0.0))

    def write(self, directory: Path) -> None:
        write_table(self.table, Path(directory) / "gradcheck.csv")
        if self.sensitivity is not None:
            self.sensitivity.write(directory)


def fd_steps(pipeline: Pipeline, relative: float) -> np.ndarray:
    D = pipeline.design.values
    return relative * np.maximum(np.abs(D), pipeline.parameterization.step_scales())


def fd_gradient(pipeline: Pipeline, steps: np.ndarray) -> np.ndarray:
    """dCd/dD by central differences; every point is a fresh nonlinear solve."""
    D = pipeline.design.values
    grad = np.zeros(len(D))
    for i, h in enumerate(steps):
        e = np.zeros(len(D))
        e[i] = h
        plus = pipeline.objective(D + e).cd
        minus = pipeline.objective(D - e).cd
        grad[i] = (plus - minus) / (2.0 * h)
        logger.debug("Finite-difference component", i=i, step=float(h), value=grad[i])
    return grad


def compare(adjoint: np.ndarray, fd: np.ndarray, config: GradCheckConfig) -> GradCheckResult:
    """Relative error per component; components below noise_ratio * max|fd| are not judged."""
    scale = float(np.abs(fd).max(initial=0.0))
    floor = max(config.noise_ratio * scale, np.finfo(float).tiny)
    rel = np.abs(adjoint - fd) / np.maximum(np.abs(fd), floor)
    checked = np.abs(fd) >= config.noise_ratio * scale
    table = pd.DataFrame({"i": np.arange(len(fd)), "adjoint_grad": adjoint, "fd_grad": fd, "rel_err": rel})
    return GradCheckResult(table=table[GRADCHECK_COLUMNS], tolerance=config.tolerance, checked=checked)


def scheme_gradients(
    config: RunConfig, settings: AppSettings, schemes: List[Scheme], pipeline: Pipeline
) -> Dict[str, np.ndarray]:
    out: Dict[str, np.ndarray] = {}
    for scheme in schemes:
        solver = config.solver.model_copy(update={"scheme": scheme, "tolerance": config.gradcheck.solve_tolerance})
        other = Pipeline(config, settings, solver=solver, mesh=pipeline.mesh)
        with timed("sensitivity", scheme=scheme.value):
            out[scheme.value] = other.gradient(other.design.values).gradient.objective
    return out


def run_gradcheck(config: RunConfig, settings: Optional[AppSettings] = None) -> GradCheckResult:
    settings = settings or AppSettings()
    check = config.gradcheck
    solver = config.solver.model_copy(update={"tolerance": check.solve_tolerance})
    pipeline = Pipeline(config, settings, solver=solver)
    pipeline.baseline()

    D = pipeline.design.values
    adjoint = pipeline.gradient(D).gradient.objective
    with timed("finite_differences", design_variables=len(D)):
        fd = fd_gradient(pipeline, fd_steps(pipeline, check.fd_step))
    result = compare(adjoint, fd, check)

    if check.schemes:
        gradients = {config.scheme.value: adjoint}
        gradients.update(scheme_gradients(config, settings, [s for s in check.schemes if s is not config.scheme], pipeline))
        result.sensitivity = sensitivity_report(gradients, reference=config.scheme.value)

    logger.info(
        "Gradient check finished",
        passed=result.passed,
        max_rel_err=result.max_rel_err,
        tolerance=check.tolerance,
        failed=result.failed,
    )
    return result


def assert_passed(result: GradCheckResult) -> None:
    if not result.passed:
        raise GradientCheckError(
            f"{len(result.failed)} gradient component(s) exceed relative error {result.tolerance:g}",
            failed=result.failed,
            details={"max_rel_err": result.max_rel_err},
        )
