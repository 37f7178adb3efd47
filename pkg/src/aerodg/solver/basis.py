"""Element-local Taylor basis.

p1: {1, xi, eta} with xi = (x - x_c)/dx, eta = (y - y_c)/dy.
p2 appends xi^2, eta^2 and xi*eta, each minus its element mean, so that
every non-constant mode averages to zero and mode 0 is the cell average.
"""

from typing import Tuple

import numpy as np

from ..mesh import ElementGeometry

N_BASIS = {0: 1, 1: 3, 2: 6}


def n_basis(order: int) -> int:
    try:
        return N_BASIS[order]
    except KeyError:
        raise ValueError(f"unsupported polynomial order {order}") from None


class TaylorBasis:
    """Vectorized Taylor basis over all elements of a mesh."""

    def __init__(self, centroid: np.ndarray, half_extent: np.ndarray, moments: np.ndarray, order: int) -> None:
        self.order = order
        self.n_basis = n_basis(order)
        self.centroid = np.asarray(centroid, dtype=float)
        self.scale = np.asarray(half_extent, dtype=float)
        dx, dy = self.scale[..., 0], self.scale[..., 1]
        moments = np.asarray(moments, dtype=float)
        self.means = np.stack(
            [moments[..., 0] / dx**2, moments[..., 1] / dy**2, moments[..., 2] / (dx * dy)], axis=-1
        )

    def evaluate(self, elements: np.ndarray, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Values (..., Nk) and gradients (..., Nk, 2) at ``points`` (..., 2).

        ``elements`` broadcasts against the leading axes of ``points``.
        """
        elements = np.asarray(elements)
        c = self.centroid[elements]
        h = self.scale[elements]
        extra = points.ndim - 1 - elements.ndim
        for _ in range(extra):
            c, h = c[..., None, :], h[..., None, :]
        xi = (points[..., 0] - c[..., 0]) / h[..., 0]
        eta = (points[..., 1] - c[..., 1]) / h[..., 1]
        rx, ry = 1.0 / h[..., 0], 1.0 / h[..., 1]
        rx, ry = np.broadcast_to(rx, xi.shape), np.broadcast_to(ry, xi.shape)

        one, zero = np.ones_like(xi), np.zeros_like(xi)
        values = [one]
        grads = [np.stack([zero, zero], axis=-1)]
        if self.order >= 1:
            values += [xi, eta]
            grads += [np.stack([rx, zero], axis=-1), np.stack([zero, ry], axis=-1)]
        if self.order >= 2:
            means = self.means[elements]
            for _ in range(extra):
                means = means[..., None, :]
            values += [xi**2 - means[..., 0], eta**2 - means[..., 1], xi * eta - means[..., 2]]
            grads += [
                np.stack([2.0 * xi * rx, zero], axis=-1),
                np.stack([zero, 2.0 * eta * ry], axis=-1),
                np.stack([eta * rx, xi * ry], axis=-1),
            ]
        return np.stack(values, axis=-1), np.stack(grads, axis=-2)


def taylor_basis_eval(geom: ElementGeometry, x: np.ndarray, i: int, p: int) -> Tuple[float, np.ndarray]:
    """Value and gradient of basis function ``i`` of order ``p`` on one element."""
    if not 0 <= i < n_basis(p):
        raise IndexError(f"basis index {i} out of range for order {p}")
    basis = TaylorBasis(geom.centroid[None], np.array([[geom.dx, geom.dy]]), geom.moments[None], p)
    values, grads = basis.evaluate(np.zeros(1, dtype=np.int64), np.asarray(x, dtype=float).reshape(1, 2))
    return float(values[0, i]), grads[0, i]
