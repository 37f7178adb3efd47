"""Bernstein polynomials."""

from math import comb

import numpy as np


def bernstein(i: int, l: int, u: float) -> float:
    """i-th Bernstein polynomial of degree ``l`` at ``u``: C(l, i) u^i (1 - u)^(l - i)."""
    if l < 0 or not 0 <= i <= l:
        raise ValueError(f"Bernstein index {i} outside [0, {l}]")
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"Bernstein parameter {u} outside [0, 1]")
    return comb(l, i) * u**i * (1.0 - u) ** (l - i)


def bernstein_all(l: int, u: np.ndarray) -> np.ndarray:
    """All degree-``l`` polynomials at every ``u``; shape (len(u), l + 1)."""
    u = np.atleast_1d(np.asarray(u, dtype=float))[:, None]
    i = np.arange(l + 1)[None, :]
    coeff = np.array([comb(l, k) for k in range(l + 1)], dtype=float)[None, :]
    return coeff * u**i * (1.0 - u) ** (l - i)


def bernstein_derivative_all(l: int, u: np.ndarray) -> np.ndarray:
    """d/du of :func:`bernstein_all`, via l (B_{i-1}^{l-1} - B_i^{l-1})."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if l == 0:
        return np.zeros((len(u), 1))
    lower = bernstein_all(l - 1, u)
    padded = np.pad(lower, ((0, 0), (1, 1)))
    return l * (padded[:, :-1] - padded[:, 1:])
