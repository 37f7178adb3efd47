"""Two-dimensional free-form deformation on a Bernstein lattice."""

from typing import List, Optional, Sequence, Tuple

import numpy as np
import structlog

from ..config import FfdConfig
from ..exceptions import EmbeddingError, ParameterizationError
from ..mesh import Mesh
from .bernstein import bernstein_all, bernstein_derivative_all
from .design import Parameterization

logger = structlog.get_logger(__name__)

EMBED_TOL = 1e-10
MAX_NEWTON = 50
MAX_HALVINGS = 30


class FfdBox:
    """Lattice of (l+1) x (m+1) control points P_ij.

    Points inside the box are X(u, v) = sum_ij B_i^l(u) B_j^m(v) P_ij.
    """

    def __init__(
        self,
        box: Sequence[float],
        lattice: Tuple[int, int],
        control_points: Optional[np.ndarray] = None,
    ) -> None:
        xmin, ymin, xmax, ymax = (float(b) for b in box)
        nx, ny = int(lattice[0]), int(lattice[1])
        if xmin >= xmax or ymin >= ymax:
            raise ParameterizationError("FFD box needs positive extents", details={"box": list(box)})
        if nx < 2 or ny < 2:
            raise ParameterizationError("FFD lattice needs at least 2 control points per direction")
        self.box = (xmin, ymin, xmax, ymax)
        self.shape = (nx, ny)
        self.l, self.m = nx - 1, ny - 1
        if control_points is None:
            xs, ys = np.meshgrid(np.linspace(xmin, xmax, nx), np.linspace(ymin, ymax, ny), indexing="ij")
            control_points = np.stack([xs, ys], axis=-1)
        self.P = np.array(control_points, dtype=float).reshape(nx, ny, 2)

    @property
    def n_control(self) -> int:
        return self.shape[0] * self.shape[1]

    @property
    def diagonal(self) -> float:
        xmin, ymin, xmax, ymax = self.box
        return float(np.hypot(xmax - xmin, ymax - ymin))

    @property
    def edge(self) -> Tuple[float, float]:
        """Lattice spacing in x and y."""
        xmin, ymin, xmax, ymax = self.box
        return (xmax - xmin) / self.l, (ymax - ymin) / self.m

    def weights(self, uv: np.ndarray) -> np.ndarray:
        """Tensor-product weights per point, shape (n, n_control) with c = i * (m+1) + j."""
        uv = np.atleast_2d(uv)
        bu = bernstein_all(self.l, uv[:, 0])
        bv = bernstein_all(self.m, uv[:, 1])
        return (bu[:, :, None] * bv[:, None, :]).reshape(len(uv), -1)

    def evaluate(self, uv: np.ndarray) -> np.ndarray:
        uv = np.atleast_2d(uv)
        return self.weights(uv) @ self.P.reshape(-1, 2)

    def jacobian(self, uv: np.ndarray) -> np.ndarray:
        """dX/d(u, v) per point, shape (n, 2, 2)."""
        uv = np.atleast_2d(uv)
        bu, dbu = bernstein_all(self.l, uv[:, 0]), bernstein_derivative_all(self.l, uv[:, 0])
        bv, dbv = bernstein_all(self.m, uv[:, 1]), bernstein_derivative_all(self.m, uv[:, 1])
        dxdu = np.einsum("ni,nj,ijk->nk", dbu, bv, self.P)
        dxdv = np.einsum("ni,nj,ijk->nk", bu, dbv, self.P)
        return np.stack([dxdu, dxdv], axis=-1)

    def deform(self, uv: np.ndarray, delta_p: np.ndarray) -> np.ndarray:
        """Displacement of embedded points for control-point moves ``delta_p`` (n_control, 2)."""
        delta_p = np.asarray(delta_p, dtype=float).reshape(-1, 2)
        if len(delta_p) != self.n_control:
            raise ParameterizationError(
                f"expected {self.n_control} control-point displacements, got {len(delta_p)}"
            )
        return self.weights(uv) @ delta_p

    def contains(self, points: np.ndarray, tol: float = 0.0) -> np.ndarray:
        corners = self.P.reshape(-1, 2)
        lo, hi = corners.min(axis=0) - tol, corners.max(axis=0) + tol
        return np.all((points >= lo) & (points <= hi), axis=1)


def ffd_embed(box: FfdBox, points: np.ndarray) -> np.ndarray:
    """Local coordinates (u, v) of each point by damped Newton iteration."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    scale = box.diagonal
    outside = np.flatnonzero(~box.contains(points, tol=EMBED_TOL * scale))
    if len(outside):
        raise EmbeddingError("points lie outside the FFD box", points=outside.tolist())

    corners = box.P.reshape(-1, 2)
    lo, hi = corners.min(axis=0), corners.max(axis=0)
    uv = np.clip((points - lo) / (hi - lo), 0.0, 1.0)

    residual = box.evaluate(uv) - points
    norm = np.linalg.norm(residual, axis=1)
    active = norm > EMBED_TOL * scale
    for _ in range(MAX_NEWTON):
        if not np.any(active):
            break
        idx = np.flatnonzero(active)
        try:
            step = np.linalg.solve(box.jacobian(uv[idx]), -residual[idx][:, :, None])[:, :, 0]
        except np.linalg.LinAlgError as exc:
            raise EmbeddingError("singular FFD map", points=idx.tolist()) from exc

        alpha = np.ones(len(idx))
        pending = np.ones(len(idx), dtype=bool)
        for _ in range(MAX_HALVINGS):
            trial = uv[idx] + alpha[:, None] * step
            trial_res = box.evaluate(trial) - points[idx]
            trial_norm = np.linalg.norm(trial_res, axis=1)
            accept = pending & (trial_norm < norm[idx])
            sel = idx[accept]
            uv[sel] = trial[accept]
            residual[sel] = trial_res[accept]
            norm[sel] = trial_norm[accept]
            pending &= ~accept
            if not np.any(pending):
                break
            alpha[pending] *= 0.5
        active = norm > EMBED_TOL * scale
        # stalled points cannot improve further
        active[idx[pending]] = False

    failed = np.flatnonzero(norm > EMBED_TOL * scale)
    if len(failed):
        raise EmbeddingError(
            "FFD embedding did not converge",
            points=failed.tolist(),
            details={"max_residual": float(norm.max())},
        )
    bad = np.flatnonzero(np.any((uv < -EMBED_TOL) | (uv > 1.0 + EMBED_TOL), axis=1))
    if len(bad):
        raise EmbeddingError("points map outside the unit square", points=bad.tolist())
    return np.clip(uv, 0.0, 1.0)


def ffd_deform(box: FfdBox, uv: np.ndarray, delta_p: np.ndarray) -> np.ndarray:
    return box.deform(uv, delta_p)


class FfdParameterization(Parameterization):
    """FFD design variables: y (and optionally x) displacements of every control point.

    Only wall vertices inside the box are embedded; the others never move.
    """

    def __init__(self, mesh: Mesh, config: FfdConfig = FfdConfig()) -> None:
        self.config = config
        self.box = FfdBox(config.box, config.lattice)
        self.wall_vertices = mesh.wall_vertices
        points = mesh.vertices[self.wall_vertices]
        inside = self.box.contains(points, tol=EMBED_TOL * self.box.diagonal)
        if not np.any(inside):
            raise ParameterizationError("no wall vertex lies inside the FFD box", details={"box": list(config.box)})
        self.embedded = np.flatnonzero(inside)
        self.uv = ffd_embed(self.box, points[inside])

        weights = self.box.weights(self.uv)
        n_wall, n_cp = len(self.wall_vertices), self.box.n_control
        components = [1, 0] if config.active_x else [1]
        modes = np.zeros((n_wall, 2, n_cp * len(components)))
        for block, comp in enumerate(components):
            modes[self.embedded, comp, block * n_cp:(block + 1) * n_cp] = weights
        modes.setflags(write=False)
        self._modes = modes
        self._components = components
        logger.info(
            "FFD box embedded",
            lattice=list(config.lattice),
            embedded=len(self.embedded),
            wall_vertices=n_wall,
            design_variables=self.n_design,
        )

    @property
    def n_design(self) -> int:
        return self._modes.shape[2]

    @property
    def modes(self) -> np.ndarray:
        return self._modes

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        ex, ey = self.box.edge
        n_cp = self.box.n_control
        limit = np.concatenate(
            [np.full(n_cp, self.config.bound_fraction * (ey if comp == 1 else ex)) for comp in self._components]
        )
        return -limit, limit

    def step_scales(self) -> np.ndarray:
        ex, ey = self.box.edge
        n_cp = self.box.n_control
        return np.concatenate([np.full(n_cp, ey if comp == 1 else ex) for comp in self._components])

    def names(self) -> List[str]:
        nx, ny = self.box.shape
        axis = {0: "x", 1: "y"}
        return [f"P{i}_{j}.{axis[comp]}" for comp in self._components for i in range(nx) for j in range(ny)]

    def control_displacements(self, delta: np.ndarray) -> np.ndarray:
        """Control-point moves (n_control, 2) encoded by ``delta``."""
        delta = np.asarray(delta, dtype=float)
        n_cp = self.box.n_control
        out = np.zeros((n_cp, 2))
        for block, comp in enumerate(self._components):
            out[:, comp] = delta[block * n_cp:(block + 1) * n_cp]
        return out
