"""Backtracking on the L1 exact-penalty merit function."""

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
import structlog

from ..exceptions import AeroDGError

logger = structlog.get_logger(__name__)

Values = Tuple[float, np.ndarray, np.ndarray]


def violation(c_eq: np.ndarray, c_in: np.ndarray) -> float:
    """||c_eq||_1 + ||max(c_in, 0)||_1."""
    return float(np.abs(c_eq).sum() + np.maximum(c_in, 0.0).sum())


def merit(f: float, c_eq: np.ndarray, c_in: np.ndarray, rho: float) -> float:
    return float(f + rho * violation(c_eq, c_in))


def update_penalty(rho: float, max_multiplier: float, margin: float = 1.1) -> float:
    """Non-decreasing penalty with rho >= margin * ||mu||_inf."""
    return float(max(rho, margin * max_multiplier))


@dataclass
class LineSearchResult:
    alpha: float
    success: bool
    merit: float
    values: Optional[Values]
    evaluations: int


def line_search(
    values: Callable[[np.ndarray], Values],
    x: np.ndarray,
    d: np.ndarray,
    current: Values,
    grad: np.ndarray,
    rho: float,
    armijo: float = 1e-4,
    max_backtracks: int = 10,
) -> LineSearchResult:
    """Largest alpha in {1, 1/2, ..., 2^-max_backtracks} with sufficient merit decrease.

    The directional derivative of the merit along a QP step is
    g^T d - rho * violation(x). A failing callback counts as a rejected trial.
    """
    f0, c_eq0, c_in0 = current
    phi0 = merit(f0, c_eq0, c_in0, rho)
    slope = float(grad @ d) - rho * violation(c_eq0, c_in0)
    if not slope < 0.0:
        logger.warning("Search direction is not a merit descent direction", slope=slope)
        return LineSearchResult(0.0, False, phi0, None, 0)

    alpha = 1.0
    for trial in range(max_backtracks + 1):
        try:
            trial_values = values(x + alpha * d)
        except AeroDGError as exc:
            logger.warning("Trial point evaluation failed", alpha=alpha, error_code=exc.error_code)
            trial_values = None
        if trial_values is not None:
            f, c_eq, c_in = trial_values
            phi = merit(f, np.asarray(c_eq), np.asarray(c_in), rho)
            if np.isfinite(phi) and phi <= phi0 + armijo * alpha * slope:
                return LineSearchResult(alpha, True, phi, (f, np.asarray(c_eq), np.asarray(c_in)), trial + 1)
        alpha *= 0.5
    return LineSearchResult(0.0, False, phi0, None, max_backtracks + 1)
