"""Approximate Riemann solvers for the face flux."""

import numpy as np

from ..config import RiemannSolver
from .gas import max_wave_speed, normal_flux, pressure, primitive_from_conservative, sound_speed


def llf_flux(ul: np.ndarray, ur: np.ndarray, n: np.ndarray, gamma: float) -> np.ndarray:
    """Local Lax-Friedrichs: central flux minus max(|v.n| + a) times the jump."""
    lam = np.maximum(max_wave_speed(ul, gamma, n), max_wave_speed(ur, gamma, n))
    central = 0.5 * (normal_flux(ul, n, gamma) + normal_flux(ur, n, gamma))
    return central - 0.5 * lam[..., None] * (ur - ul)


def hllc_flux(ul: np.ndarray, ur: np.ndarray, n: np.ndarray, gamma: float) -> np.ndarray:
    """HLLC with Davis wave-speed estimates."""
    rho_l, rho_r = ul[..., 0], ur[..., 0]
    vl = ul[..., 1:3] / rho_l[..., None]
    vr = ur[..., 1:3] / rho_r[..., None]
    vnl = np.sum(vl * n, axis=-1)
    vnr = np.sum(vr * n, axis=-1)
    pl, pr = pressure(ul, gamma), pressure(ur, gamma)
    al, ar = sound_speed(ul, gamma), sound_speed(ur, gamma)

    sl = np.minimum(vnl - al, vnr - ar)
    sr = np.maximum(vnl + al, vnr + ar)
    denom = rho_l * (sl - vnl) - rho_r * (sr - vnr)
    denom = np.where(np.abs(denom) > 1e-300, denom, 1e-300)
    s_star = (pr - pl + rho_l * vnl * (sl - vnl) - rho_r * vnr * (sr - vnr)) / denom

    fl = normal_flux(ul, n, gamma)
    fr = normal_flux(ur, n, gamma)

    def star_state(u, rho, v, vn, p, s):
        factor = rho * (s - vn) / (s - s_star)
        star = np.empty_like(u)
        star[..., 0] = factor
        star[..., 1:3] = factor[..., None] * (v + (s_star - vn)[..., None] * n)
        star[..., 3] = factor * (u[..., 3] / rho + (s_star - vn) * (s_star + p / (rho * (s - vn))))
        return star

    with np.errstate(divide="ignore", invalid="ignore"):
        ul_star = star_state(ul, rho_l, vl, vnl, pl, sl)
        ur_star = star_state(ur, rho_r, vr, vnr, pr, sr)
        fl_star = fl + sl[..., None] * (ul_star - ul)
        fr_star = fr + sr[..., None] * (ur_star - ur)

    out = np.where((sl >= 0.0)[..., None], fl, 0.0)
    out = np.where(((sl < 0.0) & (s_star >= 0.0))[..., None], fl_star, out)
    out = np.where(((s_star < 0.0) & (sr > 0.0))[..., None], fr_star, out)
    out = np.where((sr <= 0.0)[..., None], fr, out)
    return out


_SOLVERS = {
    RiemannSolver.LLF: llf_flux,
    RiemannSolver.HLLC: hllc_flux,
}


def numerical_flux(solver: RiemannSolver):
    return _SOLVERS[RiemannSolver(solver)]


def riemann_flux(
    ul: np.ndarray,
    ur: np.ndarray,
    n: np.ndarray,
    gamma: float = 1.4,
    solver: RiemannSolver = RiemannSolver.LLF,
) -> np.ndarray:
    """Checked numerical flux across a face with unit normal ``n`` pointing from left to right."""
    ul, ur, n = (np.asarray(a, dtype=float) for a in (ul, ur, n))
    primitive_from_conservative(ul, gamma)
    primitive_from_conservative(ur, gamma)
    return numerical_flux(solver)(ul, ur, n, gamma)
