"""Damped BFGS approximation of the Lagrangian Hessian."""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import structlog

logger = structlog.get_logger(__name__)

DAMPING_THRESHOLD = 0.2
MIN_EIGENVALUE = 1e-10


@dataclass
class BfgsState:
    B: np.ndarray
    s: Optional[np.ndarray] = None
    y: Optional[np.ndarray] = None
    damped: bool = False

    @classmethod
    def initial(cls, n: int, scale: float = 1.0) -> "BfgsState":
        scale = scale if np.isfinite(scale) and scale > 0.0 else 1.0
        return cls(B=scale * np.eye(n))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.B).min()) if len(self.B) else np.inf

    def is_positive_definite(self, floor: float = MIN_EIGENVALUE) -> bool:
        return self.min_eigenvalue() >= floor


def bfgs_update(state: BfgsState, s: np.ndarray, y: np.ndarray, threshold: float = DAMPING_THRESHOLD) -> BfgsState:
    """Powell-damped BFGS: y is blended with B s whenever s^T y < threshold * s^T B s."""
    s = np.asarray(s, dtype=float)
    y = np.asarray(y, dtype=float)
    if not np.linalg.norm(s) > 0.0:
        raise ValueError("BFGS update needs a nonzero step")

    B = state.B
    Bs = B @ s
    sBs = float(s @ Bs)
    sy = float(s @ y)
    damped = sy < threshold * sBs
    if damped:
        theta = (1.0 - threshold) * sBs / (sBs - sy)
        r = theta * y + (1.0 - theta) * Bs
    else:
        r = y
    sr = float(s @ r)
    B_new = B - np.outer(Bs, Bs) / sBs + np.outer(r, r) / sr
    B_new = 0.5 * (B_new + B_new.T)
    if damped:
        logger.debug("BFGS update damped", sy=sy, sBs=sBs)
    return BfgsState(B=B_new, s=s, y=y, damped=damped)
