"""Precomputed basis, quadrature and mass data for one mesh and scheme."""

from functools import cached_property
from typing import List, Optional, Set

import numpy as np
import structlog

from ..config import QuadratureConfig, Scheme
from ..exceptions import DegenerateElementError
from ..mesh import Mesh, PatchTag
from .basis import TaylorBasis
from .gas import N_VARS
from .quadrature import FaceQuadrature, VolumeQuadrature, face_quadrature, volume_quadrature

logger = structlog.get_logger(__name__)


class Discretization:
    """Everything the residual needs that depends only on geometry.

    State arrays have shape (Ne, Nk, 4); flattened index is e*Nk*4 + k*4 + m.
    """

    def __init__(self, mesh: Mesh, scheme: Scheme, quadrature: QuadratureConfig = QuadratureConfig()) -> None:
        self.mesh = mesh
        self.scheme = Scheme(scheme)
        self.order = self.scheme.order
        self.n_basis = self.scheme.n_basis
        geo = mesh.geometry
        self.geometry = geo

        degenerate = np.flatnonzero(geo.area <= 0.0)
        if len(degenerate):
            raise DegenerateElementError(int(degenerate[0]), float(geo.area[degenerate[0]]))

        volume_degree = quadrature.volume_degree or max(2, 2 * self.order)
        face_points = quadrature.face_points or (self.order + 1)
        self.volume: VolumeQuadrature = volume_quadrature(mesh, volume_degree)
        self.faces: FaceQuadrature = face_quadrature(mesh, face_points)

        self.basis = TaylorBasis(geo.centroid, geo.half_extent, geo.moments, self.order)
        elements = np.arange(mesh.n_elements)
        self.phi_v, self.dphi_v = self.basis.evaluate(elements, self.volume.points)
        self.phi_l, _ = self.basis.evaluate(mesh.face_left, self.faces.points)
        right = np.where(mesh.face_right >= 0, mesh.face_right, mesh.face_left)
        phi_r, _ = self.basis.evaluate(right, self.faces.points)
        phi_r[mesh.face_right < 0] = 0.0
        self.phi_r = phi_r

        self.mass = np.einsum("eq,eqk,eql->ekl", self.volume.weights, self.phi_v, self.phi_v)
        self.mass_inv = np.linalg.inv(self.mass)

        self.interior = mesh.interior_faces
        self.boundary = mesh.boundary_faces
        tags = mesh.patch_tag_of_faces()[self.boundary]
        self.wall = self.boundary[tags == PatchTag.WALL.value]
        self.farfield = self.boundary[tags != PatchTag.WALL.value]
        if np.any(tags == ""):
            logger.warning("Unpatched boundary faces treated as far field", count=int(np.sum(tags == "")))
        self.normals = geo.face_normal

    @property
    def n_elements(self) -> int:
        return self.mesh.n_elements

    @property
    def shape(self):
        return (self.mesh.n_elements, self.n_basis, N_VARS)

    @property
    def n_dofs(self) -> int:
        return int(np.prod(self.shape))

    @property
    def block_size(self) -> int:
        return self.n_basis * N_VARS

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)

    def unflatten(self, vector: np.ndarray) -> np.ndarray:
        return np.asarray(vector).reshape(self.shape)

    def volume_values(self, U: np.ndarray) -> np.ndarray:
        return np.einsum("eqk,ekm->eqm", self.phi_v, U)

    def volume_gradients(self, U: np.ndarray) -> np.ndarray:
        """(Ne, Q, 4, 2)."""
        return np.einsum("eqkd,ekm->eqmd", self.dphi_v, U)

    def left_traces(self, U: np.ndarray, faces: Optional[np.ndarray] = None) -> np.ndarray:
        if faces is None:
            return np.einsum("fgk,fkm->fgm", self.phi_l, U[self.mesh.face_left])
        return np.einsum("fgk,fkm->fgm", self.phi_l[faces], U[self.mesh.face_left[faces]])

    def right_traces(self, U: np.ndarray, faces: np.ndarray) -> np.ndarray:
        return np.einsum("fgk,fkm->fgm", self.phi_r[faces], U[self.mesh.face_right[faces]])

    def cell_averages(self, U: np.ndarray) -> np.ndarray:
        return U[:, 0, :]

    @cached_property
    def element_face_table(self) -> "tuple[np.ndarray, np.ndarray]":
        """Faces of each element padded to four, and whether the element is their left side."""
        table = np.empty((self.n_elements, 4), dtype=np.int64)
        for e in range(self.n_elements):
            fs = self.mesh.element_faces(e)
            table[e] = list(fs) + [fs[-1]] * (4 - len(fs))
        is_left = self.mesh.face_left[table] == np.arange(self.n_elements)[:, None]
        return table, is_left

    @cached_property
    def phi_check(self) -> np.ndarray:
        """Basis values at every volume and face quadrature point of each element."""
        table, is_left = self.element_face_table
        face_phi = np.where(is_left[:, :, None, None], self.phi_l[table], self.phi_r[table])
        face_phi = face_phi.reshape(self.n_elements, -1, self.n_basis)
        return np.concatenate([self.phi_v, face_phi], axis=1)

    def stencil(self, rings: int = 1) -> List[np.ndarray]:
        """Elements within ``rings`` face-neighbour hops of each element (itself included)."""
        neighbors = self.mesh.neighbors
        out = []
        for e in range(self.n_elements):
            seen: Set[int] = {e}
            frontier = {e}
            for _ in range(rings):
                frontier = {int(n) for f in frontier for n in neighbors[f]} - seen
                seen |= frontier
            out.append(np.array(sorted(seen), dtype=np.int64))
        return out

    def vertex_field_at_volume_points(self, field: np.ndarray) -> np.ndarray:
        """Linear interpolation of a per-vertex field to volume quadrature points."""
        return np.einsum("qk,eqkd->eqd", self.volume.bary, field[self.volume.vertices])

    def vertex_field_at_face_points(self, field: np.ndarray) -> np.ndarray:
        a = field[self.mesh.face_vertices[:, 0]]
        b = field[self.mesh.face_vertices[:, 1]]
        s = self.faces.s
        return a[:, None, :] + s[None, :, None] * (b - a)[:, None, :]
