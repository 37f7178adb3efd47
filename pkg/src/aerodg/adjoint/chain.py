"""Geometry chain X(D): parameterize the wall, then morph the volume mesh."""

import numpy as np

from ..deformation import MeshMorpher
from ..mesh import Mesh
from ..parameterization import DesignVector, Parameterization


class DesignChain:
    """Maps design values to deformed meshes of a fixed baseline."""

    def __init__(self, mesh: Mesh, parameterization: Parameterization, morpher: MeshMorpher) -> None:
        if not np.array_equal(parameterization.wall_vertices, morpher.wall):
            raise ValueError("parameterization and morpher disagree on the wall vertices")
        self.baseline = mesh
        self.parameterization = parameterization
        self.morpher = morpher

    @property
    def n_design(self) -> int:
        return self.parameterization.n_design

    def wall_displacement(self, values: np.ndarray) -> np.ndarray:
        return self.parameterization.displacement(values)

    def mesh_at(self, values: "np.ndarray | DesignVector", check: bool = True) -> Mesh:
        values = getattr(values, "values", values)
        return self.morpher.deform(self.wall_displacement(values), check=check)
