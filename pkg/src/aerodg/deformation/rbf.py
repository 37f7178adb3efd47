"""Compactly supported radial basis function interpolation of boundary displacements."""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import structlog
from scipy.linalg import LinAlgError, lu_factor, lu_solve
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from ..exceptions import DeformationError

logger = structlog.get_logger(__name__)

APPLY_CHUNK = 4096
COINCIDENT_TOL = 1e-12
RESIDUAL_TOL = 1e-10
REFINE_STEPS = 2


def rbf_kernel(d: np.ndarray, r: float) -> np.ndarray:
    """(1 - d/r)^2 inside the support radius, 0 outside."""
    if r <= 0.0:
        raise ValueError("support radius must be positive")
    d = np.asarray(d, dtype=float)
    if np.any(d < 0.0):
        raise ValueError("distances must be non-negative")
    return np.where(d <= r, (1.0 - d / r) ** 2, 0.0)


@dataclass
class RbfSystem:
    """Factorized interpolation matrix over the driving boundary nodes."""
    nodes: np.ndarray
    radius: float
    regularization: float
    phi: np.ndarray
    lu: Tuple[np.ndarray, np.ndarray]
    weights: Optional[np.ndarray] = None

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def solve(self, displacements: np.ndarray) -> np.ndarray:
        """Weights alpha with Phi alpha = displacements, one column per component."""
        rhs = np.asarray(displacements, dtype=float).reshape(self.n_nodes, -1)
        if not np.all(np.isfinite(rhs)):
            raise DeformationError("boundary displacements must be finite")
        if not np.any(rhs):
            self.weights = np.zeros_like(rhs)
            return self.weights
        weights = lu_solve(self.lu, rhs)
        # refine against the unregularized Phi, residuals in extended precision
        phi, target = self.phi.astype(np.longdouble), rhs.astype(np.longdouble)
        for _ in range(REFINE_STEPS):
            weights = weights + lu_solve(self.lu, (target - phi @ weights).astype(float))
        residual = float(np.linalg.norm((target - phi @ weights).astype(float)))
        rhs_norm = float(np.linalg.norm(rhs))
        if not residual <= RESIDUAL_TOL * rhs_norm:
            raise DeformationError(
                "RBF interpolation residual above tolerance",
                details={"residual": residual, "rhs_norm": rhs_norm, "radius": self.radius},
            )
        self.weights = weights
        return weights


def rbf_factor(nodes: np.ndarray, radius: float, regularization: float = 1e-12) -> RbfSystem:
    """Assemble and LU-factorize Phi_bb + regularization * I."""
    nodes = np.asarray(nodes, dtype=float).reshape(-1, 2)
    if not len(nodes):
        raise DeformationError("RBF system needs at least one boundary node")
    scale = max(1.0, float(np.max(np.abs(nodes))))
    pairs = cKDTree(nodes).query_pairs(COINCIDENT_TOL * scale, output_type="ndarray")
    if len(pairs):
        raise DeformationError(
            "coincident boundary nodes make the RBF matrix singular",
            details={"pairs": pairs[:10].tolist()},
        )

    phi = rbf_kernel(cdist(nodes, nodes), radius)
    neighbours = np.count_nonzero(phi > 0.0, axis=1).mean() - 1.0
    if neighbours < 2.0:
        logger.warning(
            "RBF support radius barely couples boundary nodes",
            radius=radius,
            mean_neighbours=float(neighbours),
        )
    try:
        lu = lu_factor(phi + regularization * np.eye(len(nodes)), check_finite=True)
    except (LinAlgError, ValueError) as exc:
        raise DeformationError(f"RBF factorization failed: {exc}") from exc
    if np.any(np.abs(np.diag(lu[0])) < np.finfo(float).eps):
        raise DeformationError("RBF matrix is numerically singular")
    return RbfSystem(nodes=nodes, radius=radius, regularization=regularization, phi=phi, lu=lu)


def rbf_solve(
    nodes: np.ndarray,
    displacements: np.ndarray,
    radius: float,
    regularization: float = 1e-12,
) -> RbfSystem:
    system = rbf_factor(nodes, radius, regularization)
    system.solve(displacements)
    return system


def rbf_apply(system: RbfSystem, points: np.ndarray, chunk: int = APPLY_CHUNK) -> np.ndarray:
    """Interpolated displacement at each point; streamed in chunks."""
    if system.weights is None:
        raise DeformationError("RBF weights have not been solved")
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    out = np.zeros((len(points), system.weights.shape[1]))
    if not np.any(system.weights):
        return out
    for start in range(0, len(points), chunk):
        block = points[start:start + chunk]
        out[start:start + chunk] = rbf_kernel(cdist(block, system.nodes), system.radius) @ system.weights
    return out
