"""Spatial residual R(U): face flux minus volume flux plus artificial viscosity."""

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
import structlog

from ..config import AvVariant, Scheme, SolverConfig
from ..mesh import Mesh
from .discretization import Discretization
from .gas import Freestream, flux, max_wave_speed, mirror_state
from .reconstruction import GreenGaussReconstruction
from .riemann import numerical_flux
from .viscosity import av_coefficients

logger = structlog.get_logger(__name__)

PointFunction = Callable[[np.ndarray], np.ndarray]


@dataclass
class FrozenTerms:
    """Non-smooth pieces held fixed while linearizing."""
    eps: Optional[np.ndarray] = None
    slopes: Optional[np.ndarray] = None


class ResidualOperator:
    """R(U) for one discretization.

    Wall faces see the mirror of the interior trace, far-field faces the free
    stream (or ``farfield_state(points)`` when given). ``source(points)`` adds
    a volume source so that the steady state satisfies div F = S.
    """

    def __init__(
        self,
        disc: Discretization,
        freestream: Freestream,
        config: SolverConfig = SolverConfig(),
        source: Optional[PointFunction] = None,
        farfield_state: Optional[PointFunction] = None,
    ) -> None:
        self.disc = disc
        self.freestream = freestream
        self.config = config
        self.gamma = freestream.gamma
        self._source = source
        self._farfield_state = farfield_state
        self.riemann = numerical_flux(config.riemann)

        points = disc.faces.points[disc.farfield]
        if farfield_state is None:
            ghost = np.broadcast_to(freestream.state, points.shape[:-1] + (4,)).copy()
        else:
            ghost = np.asarray(farfield_state(points), dtype=float).reshape(points.shape[:-1] + (4,))
        self.farfield_ghost = ghost

        self.recon: Optional[GreenGaussReconstruction] = None
        if disc.scheme is Scheme.FV2:
            self.recon = GreenGaussReconstruction(disc, ghost.mean(axis=1), config.limiter, self.gamma)

        self.source_term: Optional[np.ndarray] = None
        if source is not None:
            s = np.asarray(source(disc.volume.points), dtype=float)
            self.source_term = np.einsum("eq,eqk,eqm->ekm", disc.volume.weights, disc.phi_v, s)

    @property
    def mesh(self) -> Mesh:
        return self.disc.mesh

    def with_mesh(self, mesh: Mesh) -> "ResidualOperator":
        """Same scheme, flow and boundary data on another mesh of identical topology."""
        disc = Discretization(mesh, self.disc.scheme, self.config.quadrature)
        return ResidualOperator(disc, self.freestream, self.config, self._source, self._farfield_state)

    def slopes(self, U: np.ndarray) -> Optional[np.ndarray]:
        if self.recon is None:
            return None
        ubar = U[:, 0, :]
        return self.recon.limiter_factors(ubar, self.recon.gradients(ubar))

    def left_states(self, U: np.ndarray, faces: np.ndarray, slopes: Optional[np.ndarray] = None) -> np.ndarray:
        """Interior traces at the quadrature points of ``faces``."""
        if self.recon is None:
            return self.disc.left_traces(U, faces)
        ubar = U[:, 0, :]
        grads = self.recon.gradients(ubar)
        if slopes is None:
            slopes = self.recon.limiter_factors(ubar, grads)
        return self.recon.face_states(ubar, grads, slopes, self.mesh.face_left[faces], self.disc.faces.points[faces])

    def face_states(self, U: np.ndarray, frozen: Optional[FrozenTerms] = None) -> Tuple[np.ndarray, np.ndarray]:
        disc, mesh = self.disc, self.mesh
        interior = disc.interior
        if self.recon is None:
            ul = disc.left_traces(U)
            ur_int = disc.right_traces(U, interior)
        else:
            ubar = U[:, 0, :]
            grads = self.recon.gradients(ubar)
            slopes = frozen.slopes if frozen is not None and frozen.slopes is not None else None
            if slopes is None:
                slopes = self.recon.limiter_factors(ubar, grads)
            pts = disc.faces.points
            ul = self.recon.face_states(ubar, grads, slopes, mesh.face_left, pts)
            ur_int = self.recon.face_states(ubar, grads, slopes, mesh.face_right[interior], pts[interior])

        ur = np.empty_like(ul)
        ur[interior] = ur_int
        ur[disc.wall] = mirror_state(ul[disc.wall], disc.normals[disc.wall][:, None, :])
        ur[disc.farfield] = self.farfield_ghost
        return ul, ur

    def face_fluxes(
        self, U: np.ndarray, frozen: Optional[FrozenTerms] = None
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        ul, ur = self.face_states(U, frozen)
        fhat = self.riemann(ul, ur, self.disc.normals[:, None, :], self.gamma)
        return fhat, ul, ur

    def coefficients(self, U: np.ndarray, fluxes: Optional[Tuple[np.ndarray, ...]] = None) -> np.ndarray:
        av = self.config.av
        if not self.disc.scheme.is_dg or not av.active:
            return np.zeros(self.disc.n_elements)
        fhat = ul = ur = None
        if av.variant is AvVariant.FACE:
            fhat, ul, ur = fluxes if fluxes is not None else self.face_fluxes(U)
        return av_coefficients(self.disc, U, av, self.gamma, fhat, ul, ur)

    def freeze(self, U: np.ndarray) -> FrozenTerms:
        return FrozenTerms(eps=self.coefficients(U), slopes=self.slopes(U))

    def __call__(self, U: np.ndarray, frozen: Optional[FrozenTerms] = None) -> np.ndarray:
        disc, mesh = self.disc, self.mesh
        fluxes = self.face_fluxes(U, frozen)
        fhat = fluxes[0]
        w = disc.faces.weights

        R = np.zeros(disc.shape)
        np.add.at(R, mesh.face_left, np.einsum("fg,fgk,fgm->fkm", w, disc.phi_l, fhat))
        f = disc.interior
        np.add.at(R, mesh.face_right[f], -np.einsum("fg,fgk,fgm->fkm", w[f], disc.phi_r[f], fhat[f]))

        if disc.scheme.is_dg:
            wv = disc.volume.weights
            F = flux(disc.volume_values(U), self.gamma)
            R -= np.einsum("eq,eqkd,eqmd->ekm", wv, disc.dphi_v, F)

            eps = frozen.eps if frozen is not None and frozen.eps is not None else self.coefficients(U, fluxes)
            if np.any(eps > 0.0):
                grads = disc.volume_gradients(U)
                R += eps[:, None, None] * np.einsum("eq,eqkd,eqmd->ekm", wv, disc.dphi_v, grads)

        if self.source_term is not None:
            R -= self.source_term
        return R

    def wave_speeds(self, U: np.ndarray) -> np.ndarray:
        """|v| + a of each cell average."""
        return max_wave_speed(U[:, 0, :], self.gamma)


def residual(U: np.ndarray, mesh: Mesh, config: SolverConfig, fs: Freestream) -> np.ndarray:
    """One-shot residual evaluation on ``mesh``."""
    disc = Discretization(mesh, config.scheme, config.quadrature)
    return ResidualOperator(disc, fs, config)(np.asarray(U, dtype=float).reshape(disc.shape))
