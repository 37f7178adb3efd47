"""Ideal-gas relations and the 2D Euler flux.

States are conservative vectors (rho, rho v1, rho v2, rho E) stored along the
last axis. The vectorized helpers do not check validity; the public
``primitive_from_conservative`` and ``euler_flux`` do.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..config import FreestreamConfig
from ..exceptions import ConfigError, PositivityError

N_VARS = 4


@dataclass(frozen=True)
class Freestream:
    """Reference state with rho = 1, p = 1/gamma, so a = 1 and |v| = Mach."""
    mach: float = 0.8
    aoa: float = 1.25
    gamma: float = 1.4

    def __post_init__(self) -> None:
        if self.mach <= 0.0:
            raise ConfigError("Mach number must be positive", key="freestream.mach")
        if self.gamma <= 1.0:
            raise ConfigError("gamma must exceed 1", key="freestream.gamma")

    @classmethod
    def from_config(cls, config: FreestreamConfig) -> "Freestream":
        return cls(mach=config.mach, aoa=config.aoa, gamma=config.gamma)

    @property
    def alpha(self) -> float:
        return float(np.deg2rad(self.aoa))

    @property
    def density(self) -> float:
        return 1.0

    @property
    def pressure(self) -> float:
        return 1.0 / self.gamma

    @property
    def velocity(self) -> np.ndarray:
        return self.mach * np.array([np.cos(self.alpha), np.sin(self.alpha)])

    @property
    def dynamic_pressure(self) -> float:
        return 0.5 * self.density * self.mach**2

    @property
    def state(self) -> np.ndarray:
        v = self.velocity
        return conservative_from_primitive(self.density, v[0], v[1], self.pressure, self.gamma)


def pressure(u: np.ndarray, gamma: float) -> np.ndarray:
    rho = u[..., 0]
    kinetic = 0.5 * (u[..., 1] ** 2 + u[..., 2] ** 2) / rho
    return (gamma - 1.0) * (u[..., 3] - kinetic)


def pressure_gradient(u: np.ndarray, gamma: float) -> np.ndarray:
    """dp/du, shape (..., 4)."""
    v1 = u[..., 1] / u[..., 0]
    v2 = u[..., 2] / u[..., 0]
    g1 = gamma - 1.0
    return np.stack([0.5 * g1 * (v1**2 + v2**2), -g1 * v1, -g1 * v2, np.full_like(v1, g1)], axis=-1)


def sound_speed(u: np.ndarray, gamma: float) -> np.ndarray:
    return np.sqrt(np.maximum(gamma * pressure(u, gamma) / u[..., 0], 0.0))


def max_wave_speed(u: np.ndarray, gamma: float, n: Optional[np.ndarray] = None) -> np.ndarray:
    """|v.n| + a, or |v| + a when no direction is given."""
    v = u[..., 1:3] / u[..., :1]
    if n is None:
        speed = np.sqrt(np.sum(v * v, axis=-1))
    else:
        speed = np.abs(np.sum(v * n, axis=-1))
    return speed + sound_speed(u, gamma)


def conservative_from_primitive(rho, v1, v2, p, gamma: float) -> np.ndarray:
    rho, v1, v2, p = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (rho, v1, v2, p)))
    energy = p / (gamma - 1.0) + 0.5 * rho * (v1**2 + v2**2)
    return np.stack([rho, rho * v1, rho * v2, energy], axis=-1)


def primitive_from_conservative(u: np.ndarray, gamma: float = 1.4) -> Tuple[np.ndarray, ...]:
    """(rho, v1, v2, p); raises PositivityError on non-positive density or pressure."""
    u = np.asarray(u, dtype=float)
    rho = u[..., 0]
    if np.any(rho <= 0.0):
        raise PositivityError("non-positive density", details={"min_density": float(np.min(rho))})
    p = pressure(u, gamma)
    if np.any(p <= 0.0):
        raise PositivityError("non-positive pressure", details={"min_pressure": float(np.min(p))})
    return rho, u[..., 1] / rho, u[..., 2] / rho, p


def flux(u: np.ndarray, gamma: float) -> np.ndarray:
    """Inviscid flux tensor, shape (..., 4, 2)."""
    rho = u[..., 0]
    v1 = u[..., 1] / rho
    v2 = u[..., 2] / rho
    p = pressure(u, gamma)
    h = u[..., 3] + p
    f1 = np.stack([u[..., 1], u[..., 1] * v1 + p, u[..., 2] * v1, h * v1], axis=-1)
    f2 = np.stack([u[..., 2], u[..., 1] * v2, u[..., 2] * v2 + p, h * v2], axis=-1)
    return np.stack([f1, f2], axis=-1)


def normal_flux(u: np.ndarray, n: np.ndarray, gamma: float) -> np.ndarray:
    f = flux(u, gamma)
    return f[..., 0] * n[..., None, 0] + f[..., 1] * n[..., None, 1]


def euler_flux(u: np.ndarray, gamma: float = 1.4) -> np.ndarray:
    primitive_from_conservative(u, gamma)
    return flux(np.asarray(u, dtype=float), gamma)


def flux_jacobians(u: np.ndarray, gamma: float) -> np.ndarray:
    """dF_d/du for d = 1, 2; shape (..., 2, 4, 4)."""
    rho = u[..., 0]
    v1 = u[..., 1] / rho
    v2 = u[..., 2] / rho
    g1 = gamma - 1.0
    q2 = v1**2 + v2**2
    enthalpy = (u[..., 3] + pressure(u, gamma)) / rho
    zero, one = np.zeros_like(rho), np.ones_like(rho)
    phi = 0.5 * g1 * q2

    a1 = np.stack(
        [
            np.stack([zero, one, zero, zero], axis=-1),
            np.stack([phi - v1**2, (3.0 - gamma) * v1, -g1 * v2, g1 * one], axis=-1),
            np.stack([-v1 * v2, v2, v1, zero], axis=-1),
            np.stack([v1 * (phi - enthalpy), enthalpy - g1 * v1**2, -g1 * v1 * v2, gamma * v1], axis=-1),
        ],
        axis=-2,
    )
    a2 = np.stack(
        [
            np.stack([zero, zero, one, zero], axis=-1),
            np.stack([-v1 * v2, v2, v1, zero], axis=-1),
            np.stack([phi - v2**2, -g1 * v1, (3.0 - gamma) * v2, g1 * one], axis=-1),
            np.stack([v2 * (phi - enthalpy), -g1 * v1 * v2, enthalpy - g1 * v2**2, gamma * v2], axis=-1),
        ],
        axis=-2,
    )
    return np.stack([a1, a2], axis=-3)


def mirror_state(u: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Slip-wall ghost: normal momentum reflected."""
    m = u[..., 1:3]
    mn = np.sum(m * n, axis=-1, keepdims=True)
    ghost = u.copy()
    ghost[..., 1:3] = m - 2.0 * mn * n
    return ghost


def mirror_matrix(n: np.ndarray) -> np.ndarray:
    """Linear map of :func:`mirror_state`, shape (..., 4, 4)."""
    n = np.asarray(n, dtype=float)
    out = np.zeros(n.shape[:-1] + (4, 4))
    out[..., 0, 0] = 1.0
    out[..., 3, 3] = 1.0
    out[..., 1:3, 1:3] = np.eye(2) - 2.0 * n[..., :, None] * n[..., None, :]
    return out
