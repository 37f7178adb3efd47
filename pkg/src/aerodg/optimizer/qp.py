"""Convex QP subproblem by a primal active-set method.

    min  g^T d + 1/2 d^T B d
    s.t. c_eq + A_eq d  = 0
         c_in + A_in d <= 0
         lower <= d <= upper

A feasible starting point comes from a phase-one LP. When the linearized
constraints are inconsistent, elastic variables relax them under an L1
penalty and the result is flagged as relaxed.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg as sla
from scipy.optimize import linprog
import structlog

from ..exceptions import OptimizerError

logger = structlog.get_logger(__name__)

FEAS_TOL = 1e-9
ELASTIC_WEIGHT = 1e4
ELASTIC_REGULARIZATION = 1e-8


@dataclass
class QpResult:
    d: np.ndarray
    mu_eq: np.ndarray     # L = q(d) - mu_eq^T (c_eq + A_eq d)
    mu_in: np.ndarray     # >= 0, L = q(d) + mu_in^T (c_in + A_in d)
    mu_lower: np.ndarray  # >= 0
    mu_upper: np.ndarray  # >= 0
    relaxed: bool = False
    iterations: int = 0

    @property
    def max_multiplier(self) -> float:
        parts = [np.abs(self.mu_eq), np.abs(self.mu_in)]
        return float(max((p.max() for p in parts if p.size), default=0.0))


def _rows(A: Optional[np.ndarray], n: int) -> np.ndarray:
    return np.zeros((0, n)) if A is None else np.atleast_2d(np.asarray(A, dtype=float)).reshape(-1, n)


def _vec(c: Optional[np.ndarray], m: int) -> np.ndarray:
    return np.zeros(m) if c is None else np.asarray(c, dtype=float).reshape(m)


def _solve_eqp(H: np.ndarray, grad: np.ndarray, A: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Step p and multipliers nu of min 1/2 p^T H p + grad^T p s.t. A p = 0."""
    n, m = len(grad), len(A)
    K = np.zeros((n + m, n + m))
    K[:n, :n] = H
    K[:n, n:] = A.T
    K[n:, :n] = A
    rhs = np.concatenate([-grad, np.zeros(m)])
    try:
        sol = sla.solve(K, rhs, assume_a="sym")
    except (sla.LinAlgError, ValueError):
        sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    return sol[:n], sol[n:]


def _independent(A: np.ndarray, row: np.ndarray) -> bool:
    if len(A) == 0:
        return bool(np.linalg.norm(row) > 0.0)
    return np.linalg.matrix_rank(np.vstack([A, row])) > np.linalg.matrix_rank(A)


def active_set(
    H: np.ndarray,
    q: np.ndarray,
    E: np.ndarray,
    e: np.ndarray,
    G: np.ndarray,
    h: np.ndarray,
    z0: np.ndarray,
    max_iter: int = 500,
    tol: float = 1e-12,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """Primal active set from the feasible point ``z0``; returns (z, nu_E, nu_G, iterations).

    Multipliers follow L = 1/2 z^T H z + q^T z + nu_E^T (E z - e) + nu_G^T (G z - h).
    """
    z = np.array(z0, dtype=float)
    scale = 1.0 + float(np.abs(q).max(initial=0.0)) + float(np.abs(H).max(initial=0.0))
    working: List[int] = []
    base = E.copy()
    for i in np.flatnonzero(np.abs(G @ z - h) <= FEAS_TOL * (1.0 + np.abs(h))):
        candidate = np.vstack([base, G[working]]) if working else base
        if _independent(candidate, G[i]):
            working.append(int(i))

    nu_G = np.zeros(len(G))
    for it in range(1, max_iter + 1):
        A = np.vstack([E, G[working]]) if working else E
        p, nu = _solve_eqp(H, H @ z + q, A)
        if np.abs(p).max(initial=0.0) <= 1e-12 * (1.0 + np.abs(z).max(initial=0.0)):
            nu_W = nu[len(E):]
            if not working or nu_W.min() >= -tol * scale:
                nu_G = np.zeros(len(G))
                nu_G[working] = np.maximum(nu_W, 0.0) if working else 0.0
                return z, nu[: len(E)], nu_G, it
            working.pop(int(np.argmin(nu_W)))
            continue

        Gp = G @ p
        slack = h - G @ z
        alpha, blocking = 1.0, -1
        for i in np.flatnonzero(Gp > 1e-14 * (1.0 + np.abs(p).max())):
            if i in working:
                continue
            a = max(slack[i], 0.0) / Gp[i]
            if a < alpha:
                alpha, blocking = a, int(i)
        z = z + alpha * p
        if blocking >= 0:
            working.append(blocking)

    raise OptimizerError("QP active-set iteration limit reached", status="qp_failure", details={"iterations": max_iter})


def _phase_one(
    A_eq: np.ndarray, c_eq: np.ndarray, A_in: np.ndarray, c_in: np.ndarray, lower: np.ndarray, upper: np.ndarray
) -> Optional[np.ndarray]:
    """A point satisfying the linearized constraints, or None when they are inconsistent."""
    n, me, mi = A_eq.shape[1], len(A_eq), len(A_in)
    nt = mi + 2 * me
    cost = np.concatenate([np.zeros(n), np.ones(nt)])
    A_ub = np.hstack([A_in, -np.eye(mi), np.zeros((mi, 2 * me))]) if mi else None
    b_ub = -c_in if mi else None
    A_eq_lp = np.hstack([A_eq, np.zeros((me, mi)), -np.eye(me), np.eye(me)]) if me else None
    b_eq_lp = -c_eq if me else None
    bounds = [(lo if np.isfinite(lo) else None, up if np.isfinite(up) else None) for lo, up in zip(lower, upper)]
    bounds += [(0.0, None)] * nt
    res = linprog(cost, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq_lp, b_eq=b_eq_lp, bounds=bounds, method="highs")
    if res.status != 0:
        return None
    violation = float(res.x[n:].sum())
    if violation > FEAS_TOL * (1.0 + np.abs(np.concatenate([c_eq, c_in])).max(initial=0.0)):
        return None
    return res.x[:n]


def _bound_rows(lower: np.ndarray, upper: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    n = len(lower)
    up = np.flatnonzero(np.isfinite(upper))
    lo = np.flatnonzero(np.isfinite(lower))
    G = np.vstack([np.eye(n)[up], -np.eye(n)[lo]])
    h = np.concatenate([upper[up], -lower[lo]])
    return G, h, up, lo


def qp_solve(
    g: np.ndarray,
    B: np.ndarray,
    A_eq: Optional[np.ndarray] = None,
    c_eq: Optional[np.ndarray] = None,
    A_in: Optional[np.ndarray] = None,
    c_in: Optional[np.ndarray] = None,
    lower: Optional[np.ndarray] = None,
    upper: Optional[np.ndarray] = None,
    max_iter: int = 500,
) -> QpResult:
    g = np.asarray(g, dtype=float)
    n = len(g)
    B = np.asarray(B, dtype=float).reshape(n, n)
    A_eq, A_in = _rows(A_eq, n), _rows(A_in, n)
    c_eq, c_in = _vec(c_eq, len(A_eq)), _vec(c_in, len(A_in))
    lower = np.full(n, -np.inf) if lower is None else np.asarray(lower, dtype=float)
    upper = np.full(n, np.inf) if upper is None else np.asarray(upper, dtype=float)
    if np.any(lower > upper):
        raise OptimizerError("QP bounds are inconsistent", status="qp_failure")
    me, mi = len(A_eq), len(A_in)
    Gb, hb, up, lo = _bound_rows(lower, upper)

    d0 = np.clip(np.zeros(n), lower, upper)
    feasible = (
        np.all(np.abs(A_eq @ d0 + c_eq) <= FEAS_TOL)
        and np.all(A_in @ d0 + c_in <= FEAS_TOL)
    )
    if not feasible:
        start = _phase_one(A_eq, c_eq, A_in, c_in, lower, upper)
        feasible = start is not None
        if feasible:
            d0 = start

    if feasible:
        G = np.vstack([A_in, Gb])
        h = np.concatenate([-c_in, hb])
        d, nu_E, nu_G, iters = active_set(B, g, A_eq, -c_eq, G, h, d0, max_iter)
        mu_in, nu_b = nu_G[:mi], nu_G[mi:]
        mu_upper, mu_lower = np.zeros(n), np.zeros(n)
        mu_upper[up] = nu_b[: len(up)]
        mu_lower[lo] = nu_b[len(up):]
        return QpResult(d, -nu_E, mu_in, mu_lower, mu_upper, relaxed=False, iterations=iters)

    return _elastic(g, B, A_eq, c_eq, A_in, c_in, lower, upper, d0, max_iter)


def _elastic(g, B, A_eq, c_eq, A_in, c_in, lower, upper, d0, max_iter) -> QpResult:
    """L1-relaxed subproblem; always feasible from d0 with slacks set to the violations."""
    n, me, mi = len(g), len(A_eq), len(A_in)
    nt = mi + 2 * me
    weight = ELASTIC_WEIGHT * max(1.0, float(np.abs(g).max(initial=0.0)))
    reg = ELASTIC_REGULARIZATION * max(1.0, float(np.trace(B)) / max(n, 1))
    H = sla.block_diag(B, reg * np.eye(nt))
    q = np.concatenate([g, np.full(nt, weight)])

    E = np.hstack([A_eq, np.zeros((me, mi)), -np.eye(me), np.eye(me)])
    G_in = np.hstack([A_in, -np.eye(mi), np.zeros((mi, 2 * me))])
    G_t = np.hstack([np.zeros((nt, n)), -np.eye(nt)])
    Gb, hb, up, lo = _bound_rows(lower, upper)
    G_b = np.hstack([Gb, np.zeros((len(Gb), nt))])
    G = np.vstack([G_in, G_t, G_b])
    h = np.concatenate([-c_in, np.zeros(nt), hb])

    r_eq = A_eq @ d0 + c_eq
    z0 = np.concatenate([d0, np.maximum(A_in @ d0 + c_in, 0.0), np.maximum(r_eq, 0.0), np.maximum(-r_eq, 0.0)])
    z, nu_E, nu_G, iters = active_set(H, q, E, -c_eq, G, h, z0, max_iter)
    logger.warning("QP linearization infeasible, solved the relaxed subproblem", violation=float(z[n:].sum()))

    nu_b = nu_G[mi + nt:]
    mu_upper, mu_lower = np.zeros(n), np.zeros(n)
    mu_upper[up] = nu_b[: len(up)]
    mu_lower[lo] = nu_b[len(up):]
    return QpResult(z[:n], -nu_E, nu_G[:mi], mu_lower, mu_upper, relaxed=True, iterations=iters)
