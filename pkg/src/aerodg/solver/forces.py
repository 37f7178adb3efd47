"""Pressure forces on the wall and their lift/drag decomposition."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Tuple

import numpy as np
import pandas as pd
import structlog

from .gas import pressure
from .residual import ResidualOperator

logger = structlog.get_logger(__name__)


def rotate_forces(fx: float, fy: float, alpha: float) -> Tuple[float, float]:
    """Body-axis force to (drag, lift) for angle of attack ``alpha`` in radians."""
    drag = fx * np.cos(alpha) + fy * np.sin(alpha)
    lift = -fx * np.sin(alpha) + fy * np.cos(alpha)
    return float(drag), float(lift)


@dataclass
class ForceReport:
    cl: float
    cd: float
    fx: float
    fy: float
    surface: pd.DataFrame = field(repr=False)

    def write_surface_csv(self, path: Path) -> None:
        self.surface.to_csv(path, index=False, float_format="%.17g")


def wall_traces(U: np.ndarray, operator: ResidualOperator) -> np.ndarray:
    """The scheme's own trace representation at wall quadrature points."""
    return operator.left_states(U, operator.disc.wall)


def compute_forces(U: np.ndarray, operator: ResidualOperator, chord: float = 1.0) -> ForceReport:
    """Integrate (p - p_inf) n over wall faces; n points out of the fluid into the body."""
    disc = operator.disc
    fs = operator.freestream
    wall = disc.wall
    u = wall_traces(U, operator)
    p = pressure(u, fs.gamma)
    w = disc.faces.weights[wall]
    n = disc.normals[wall]
    dp = p - fs.pressure
    force = np.einsum("fg,fg,fd->d", w, dp, n) if len(wall) else np.zeros(2)
    scale = fs.dynamic_pressure * chord
    drag, lift = rotate_forces(force[0], force[1], fs.alpha)

    pts = disc.faces.points[wall].reshape(-1, 2)
    surface = pd.DataFrame({"x": pts[:, 0], "y": pts[:, 1], "Cp": (dp / fs.dynamic_pressure).ravel()})
    return ForceReport(cl=lift / scale, cd=drag / scale, fx=float(force[0]), fy=float(force[1]), surface=surface)
