"""Initial states and L2 projection onto the element basis."""

from typing import Callable

import numpy as np

from .discretization import Discretization
from .gas import Freestream


def freestream_state(disc: Discretization, fs: Freestream) -> np.ndarray:
    """Uniform free stream: cell averages set, higher modes zero."""
    U = disc.zeros()
    U[:, 0, :] = fs.state
    return U


def project(fn: Callable[[np.ndarray], np.ndarray], disc: Discretization) -> np.ndarray:
    """L2 projection of a point function ``fn(points) -> (..., 4)`` onto the basis."""
    values = np.asarray(fn(disc.volume.points), dtype=float)
    rhs = np.einsum("eq,eqk,eqm->ekm", disc.volume.weights, disc.phi_v, values)
    return np.einsum("ekl,elm->ekm", disc.mass_inv, rhs)


def check_state(U: np.ndarray, disc: Discretization) -> np.ndarray:
    U = np.asarray(U, dtype=float)
    if U.shape != disc.shape:
        U = U.reshape(disc.shape)
    if not np.all(np.isfinite(U)):
        raise ValueError("state has non-finite entries")
    return U
