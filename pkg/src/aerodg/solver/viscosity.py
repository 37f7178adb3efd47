"""Artificial-viscosity coefficients from the strong residual."""

from typing import Optional

import numpy as np

from ..config import ArtificialViscosityConfig, AvIndicator, AvVariant
from .discretization import Discretization
from .gas import flux_jacobians, normal_flux

MODAL_DECAY_WIDTH = 1.0


def volume_strong_residual(disc: Discretization, U: np.ndarray, gamma: float) -> np.ndarray:
    """Element mean of |div F(u_h)|_2, with div F = A_1 du/dx + A_2 du/dy."""
    u = disc.volume_values(U)
    grads = disc.volume_gradients(U)
    div = np.einsum("eqdmn,eqnd->eqm", flux_jacobians(u, gamma), grads)
    norm = np.sqrt(np.sum(div * div, axis=-1))
    w = disc.volume.weights
    return np.sum(w * norm, axis=1) / np.sum(w, axis=1)


def face_strong_residual(
    disc: Discretization,
    fhat: np.ndarray,
    ul: np.ndarray,
    ur: np.ndarray,
    gamma: float,
) -> np.ndarray:
    """Perimeter mean of |F_hat - F(u_h).n|_2 over each element's faces."""
    mesh = disc.mesh
    n = disc.normals[:, None, :]
    w = disc.faces.weights
    jump_l = np.sqrt(np.sum((fhat - normal_flux(ul, n, gamma)) ** 2, axis=-1))
    total = np.zeros(disc.n_elements)
    perimeter = np.zeros(disc.n_elements)
    np.add.at(total, mesh.face_left, np.sum(w * jump_l, axis=1))
    np.add.at(perimeter, mesh.face_left, np.sum(w, axis=1))
    f = disc.interior
    jump_r = np.sqrt(np.sum((fhat[f] - normal_flux(ur[f], n[f], gamma)) ** 2, axis=-1))
    np.add.at(total, mesh.face_right[f], np.sum(w[f] * jump_r, axis=1))
    np.add.at(perimeter, mesh.face_right[f], np.sum(w[f], axis=1))
    return total / perimeter


def modal_decay_gate(disc: Discretization, U: np.ndarray) -> np.ndarray:
    """Smooth 0..1 switch from the share of density energy in the highest modes."""
    p = disc.order
    if p < 1:
        return np.zeros(disc.n_elements)
    top = slice(1, 3) if p == 1 else slice(3, 6)
    rho = disc.volume_values(U)[..., 0]
    high = np.einsum("eqk,ek->eq", disc.phi_v[:, :, top], U[:, top, 0])
    w = disc.volume.weights
    with np.errstate(divide="ignore"):
        s = np.log10(np.sum(w * high**2, axis=1) / np.sum(w * rho**2, axis=1))
    s0 = -2.0 - 4.0 * np.log10(p)
    k = MODAL_DECAY_WIDTH
    return np.where(
        s < s0 - k,
        0.0,
        np.where(s > s0 + k, 1.0, 0.5 * (1.0 + np.sin(0.5 * np.pi * (s - s0) / k))),
    )


def av_coefficients(
    disc: Discretization,
    U: np.ndarray,
    config: ArtificialViscosityConfig,
    gamma: float,
    fhat: Optional[np.ndarray] = None,
    ul: Optional[np.ndarray] = None,
    ur: Optional[np.ndarray] = None,
) -> np.ndarray:
    """epsilon_e = C h^(2 - beta) * strong residual, optionally gated."""
    if not disc.scheme.is_dg or not config.active:
        return np.zeros(disc.n_elements)
    if config.variant is AvVariant.FACE:
        if fhat is None:
            raise ValueError("face variant needs the face fluxes and traces")
        strength = face_strong_residual(disc, fhat, ul, ur, gamma)
    else:
        strength = volume_strong_residual(disc, U, gamma)
    eps = config.c_eps * disc.geometry.h ** (2.0 - config.beta) * strength
    if config.indicator is AvIndicator.MODAL_DECAY:
        eps = eps * modal_decay_gate(disc, U)
    return eps
