"""Positivity-preserving scaling of high-order modes."""

from typing import Tuple

import numpy as np
import structlog

from ..exceptions import PositivityError
from .discretization import Discretization
from .gas import pressure

logger = structlog.get_logger(__name__)

POSITIVITY_EPS = 1e-10
BISECTION_STEPS = 50


def positivity_limit(
    U: np.ndarray,
    disc: Discretization,
    gamma: float = 1.4,
    eps: float = POSITIVITY_EPS,
) -> Tuple[np.ndarray, np.ndarray]:
    """Scale non-constant modes toward the cell average until rho, p >= eps at all check points.

    Returns the limited state and the per-element scaling factor. Cell
    averages are never modified.
    """
    ubar = U[:, 0, :]
    p_bar = pressure(ubar, gamma)
    bad = np.flatnonzero((ubar[:, 0] <= 0.0) | (p_bar <= 0.0) | ~np.all(np.isfinite(ubar), axis=1))
    if len(bad):
        raise PositivityError(
            "non-positive cell average",
            elements=bad.tolist(),
            details={"min_density": float(ubar[:, 0].min()), "min_pressure": float(p_bar.min())},
        )
    theta = np.ones(disc.n_elements)
    if disc.n_basis == 1:
        return U, theta

    floor = np.minimum(eps, np.minimum(ubar[:, 0], p_bar))
    phi = disc.phi_check  # (Ne, P, Nk)
    out = U.copy()

    rho = np.einsum("epk,ek->ep", phi, out[:, :, 0])
    rho_min = rho.min(axis=1)
    low = rho_min < floor
    theta1 = np.ones(disc.n_elements)
    theta1[low] = np.clip((ubar[low, 0] - floor[low]) / (ubar[low, 0] - rho_min[low]), 0.0, 1.0)
    out[:, 1:, 0] *= theta1[:, None]

    states = np.einsum("epk,ekm->epm", phi, out)
    p = pressure(states, gamma)
    need = p < floor[:, None]
    theta2 = np.ones(disc.n_elements)
    if np.any(need):
        e_idx, p_idx = np.nonzero(need)
        base = ubar[e_idx]
        diff = states[e_idx, p_idx] - base
        target = floor[e_idx]
        lo = np.zeros(len(e_idx))
        hi = np.ones(len(e_idx))
        for _ in range(BISECTION_STEPS):
            mid = 0.5 * (lo + hi)
            ok = pressure(base + mid[:, None] * diff, gamma) >= target
            lo = np.where(ok, mid, lo)
            hi = np.where(ok, hi, mid)
        np.minimum.at(theta2, e_idx, lo)
        out[:, 1:, :] *= theta2[:, None, None]

    theta = theta1 * theta2
    limited = int(np.count_nonzero(theta < 1.0))
    if limited:
        logger.debug("Positivity limiter active", elements=limited, min_theta=float(theta.min()))
    return out, theta
