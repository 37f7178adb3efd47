"""Green-Gauss gradients with Barth-Jespersen limiting for the FV2 scheme."""

from typing import Optional

import numpy as np
import scipy.sparse as sp
import structlog

from ..config import SlopeLimiter
from .discretization import Discretization
from .gas import N_VARS, mirror_matrix, mirror_state, pressure

logger = structlog.get_logger(__name__)


class GreenGaussReconstruction:
    """Cell gradients as an affine map of the cell averages.

    Face values are the mean of the two adjacent averages; boundary faces use
    the wall mirror of the interior average or the far-field ghost state.
    The sparse operator maps averages (Ne*4) to gradients (Ne*4*2).
    """

    def __init__(
        self,
        disc: Discretization,
        farfield_ghost: np.ndarray,
        limiter: SlopeLimiter = SlopeLimiter.BARTH_JESPERSEN,
        gamma: float = 1.4,
    ) -> None:
        self.disc = disc
        self.limiter = SlopeLimiter(limiter)
        self.gamma = gamma
        mesh, geo = disc.mesh, disc.geometry
        ne = mesh.n_elements
        self.farfield_ghost = np.asarray(farfield_ghost, dtype=float).reshape(len(disc.farfield), N_VARS)

        rows, cols, vals = [], [], []
        offset = np.zeros((ne, N_VARS, 2))
        m = np.arange(N_VARS)

        def add(elem: np.ndarray, src: np.ndarray, weight: np.ndarray) -> None:
            # weight: (n, 2) multiplies 0.5 * average of src; one entry per variable and direction
            for d in range(2):
                r = ((elem[:, None] * N_VARS + m[None, :]) * 2 + d).ravel()
                c = (src[:, None] * N_VARS + m[None, :]).ravel()
                rows.append(r)
                cols.append(c)
                vals.append(np.repeat(0.5 * weight[:, d], N_VARS))

        f = disc.interior
        left, right = mesh.face_left[f], mesh.face_right[f]
        sn = geo.face_normal[f] * geo.face_length[f, None]
        for src in (left, right):
            add(left, src, sn / geo.area[left, None])
            add(right, src, -sn / geo.area[right, None])

        f = disc.wall
        left = mesh.face_left[f]
        sn = geo.face_normal[f] * geo.face_length[f, None]
        reflect = 0.5 * (np.eye(N_VARS)[None] + mirror_matrix(geo.face_normal[f]))
        for d in range(2):
            coeff = (sn[:, d] / geo.area[left])[:, None, None] * reflect
            r = np.broadcast_to(((left[:, None] * N_VARS + m[None, :]) * 2 + d)[:, :, None], coeff.shape)
            c = np.broadcast_to((left[:, None] * N_VARS + m[None, :])[:, None, :], coeff.shape)
            rows.append(r.ravel())
            cols.append(c.ravel())
            vals.append(coeff.ravel())

        f = disc.farfield
        left = mesh.face_left[f]
        sn = geo.face_normal[f] * geo.face_length[f, None]
        add(left, left, sn / geo.area[left, None])
        np.add.at(
            offset,
            left,
            0.5 * self.farfield_ghost[:, :, None] * (sn / geo.area[left, None])[:, None, :],
        )

        size = ne * N_VARS
        self.operator = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(2 * size, size)
        )
        self.offset = offset.ravel()

        table, is_left = disc.element_face_table
        pts = disc.faces.points[table]  # (Ne, 4, G, 2)
        self._offsets = (pts - geo.centroid[:, None, None, :]).reshape(ne, -1, 2)

    def gradients(self, ubar: np.ndarray) -> np.ndarray:
        """Unlimited gradients, shape (Ne, 4, 2)."""
        return (self.operator @ ubar.ravel() + self.offset).reshape(-1, N_VARS, 2)

    def _bounds(self, ubar: np.ndarray) -> "tuple[np.ndarray, np.ndarray]":
        mesh, disc = self.disc.mesh, self.disc
        umax, umin = ubar.copy(), ubar.copy()
        f = disc.interior
        left, right = mesh.face_left[f], mesh.face_right[f]
        np.maximum.at(umax, left, ubar[right])
        np.maximum.at(umax, right, ubar[left])
        np.minimum.at(umin, left, ubar[right])
        np.minimum.at(umin, right, ubar[left])
        f = disc.wall
        ghost = mirror_state(ubar[mesh.face_left[f]], disc.normals[f])
        np.maximum.at(umax, mesh.face_left[f], ghost)
        np.minimum.at(umin, mesh.face_left[f], ghost)
        f = disc.farfield
        np.maximum.at(umax, mesh.face_left[f], self.farfield_ghost)
        np.minimum.at(umin, mesh.face_left[f], self.farfield_ghost)
        return umax, umin

    def limiter_factors(self, ubar: np.ndarray, grads: np.ndarray) -> np.ndarray:
        """Per element and variable slope factors in [0, 1]."""
        if self.limiter is SlopeLimiter.NONE:
            phi = np.ones(ubar.shape)
        else:
            umax, umin = self._bounds(ubar)
            delta = np.einsum("emd,epd->epm", grads, self._offsets)
            up = (umax - ubar)[:, None, :]
            down = (umin - ubar)[:, None, :]
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(
                    delta > 0.0,
                    np.minimum(1.0, up / delta),
                    np.where(delta < 0.0, np.minimum(1.0, down / delta), 1.0),
                )
            phi = np.clip(ratio.min(axis=1), 0.0, 1.0)

        states = ubar[:, None, :] + np.einsum("em,emd,epd->epm", phi, grads, self._offsets)
        bad = np.any((states[..., 0] <= 0.0) | (pressure(states, self.gamma) <= 0.0), axis=1)
        if np.any(bad):
            logger.debug("FV2 reconstruction reverted to first order", elements=int(bad.sum()))
            phi[bad] = 0.0
        return phi

    def face_states(
        self,
        ubar: np.ndarray,
        grads: np.ndarray,
        phi: np.ndarray,
        elements: np.ndarray,
        points: np.ndarray,
    ) -> np.ndarray:
        """Reconstructed states of ``elements`` at ``points`` (n, G, 2)."""
        offsets = points - self.disc.geometry.centroid[elements][:, None, :]
        return ubar[elements][:, None, :] + np.einsum(
            "nm,nmd,ngd->ngm", phi[elements], grads[elements], offsets
        )

    def trace_operator(self, phi: np.ndarray, faces: np.ndarray) -> sp.csr_matrix:
        """Linear map from averages (Ne*4) to left traces at the faces' quadrature points.

        Rows are ordered (face, point, variable); limiter factors are held fixed.
        """
        mesh, geo = self.disc.mesh, self.disc.geometry
        left = mesh.face_left[faces]
        pts = self.disc.faces.points[faces]
        n, g = pts.shape[:2]
        m = np.arange(N_VARS)
        row = np.arange(n * g * N_VARS)
        elem_var = np.broadcast_to(left[:, None, None] * N_VARS + m[None, None, :], (n, g, N_VARS)).ravel()
        out = sp.csr_matrix((np.ones(len(row)), (row, elem_var)), shape=(len(row), self.operator.shape[1]))
        offsets = pts - geo.centroid[left][:, None, :]
        for d in range(2):
            coeff = (phi[left][:, None, :] * offsets[:, :, d, None]).ravel()
            out = out + sp.diags(coeff) @ self.operator[elem_var * 2 + d]
        return out.tocsr()


def reconstruct_fv2(
    ubar: np.ndarray,
    disc: Discretization,
    farfield_ghost: np.ndarray,
    limiter: SlopeLimiter = SlopeLimiter.BARTH_JESPERSEN,
    gamma: float = 1.4,
    phi: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Limited cell gradients (Ne, 4, 2)."""
    recon = GreenGaussReconstruction(disc, farfield_ghost, limiter, gamma)
    grads = recon.gradients(ubar)
    if phi is None:
        phi = recon.limiter_factors(ubar, grads)
    return grads * phi[:, :, None]
