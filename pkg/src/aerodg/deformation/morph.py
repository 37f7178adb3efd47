"""Volume-mesh morphing driven by wall displacements."""

from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd
import structlog

from ..config import RbfConfig
from ..exceptions import DeformationError
from ..mesh import Mesh, validate
from ..mesh.validation import IssueKind
from .rbf import RbfSystem, rbf_apply, rbf_factor

logger = structlog.get_logger(__name__)

INVALID_KINDS = (IssueKind.INVERTED_ELEMENT, IssueKind.DEGENERATE_ELEMENT, IssueKind.NON_CONVEX_ELEMENT)


@dataclass(frozen=True)
class DeformationReport:
    max_displacement: float
    min_area_before: float
    min_area_after: float
    inverted_elements: int

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(self)])

    def write_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.17g")
        return path


class MeshMorpher:
    """Reusable RBF morpher for a fixed baseline mesh.

    Every patched boundary vertex drives the interpolation; far-field vertices
    are held at zero displacement. The factorization is computed once.
    """

    def __init__(self, mesh: Mesh, config: RbfConfig = RbfConfig()) -> None:
        self.mesh = mesh
        self.config = config
        self.boundary = mesh.boundary_vertices
        self.wall = mesh.wall_vertices
        self._wall_slots = np.searchsorted(self.boundary, self.wall)
        self.system: RbfSystem = rbf_factor(mesh.vertices[self.boundary], config.radius, config.regularization)
        logger.debug("RBF system factorized", boundary_nodes=len(self.boundary), radius=config.radius)

    def vertex_displacement(self, wall_displacement: np.ndarray) -> np.ndarray:
        """Displacement of every mesh vertex; linear in ``wall_displacement``."""
        wall_displacement = np.asarray(wall_displacement, dtype=float)
        if wall_displacement.shape != (len(self.wall), 2):
            raise DeformationError(
                f"expected wall displacements of shape ({len(self.wall)}, 2), got {wall_displacement.shape}"
            )
        rhs = np.zeros((len(self.boundary), 2))
        rhs[self._wall_slots] = wall_displacement
        self.system.solve(rhs)
        out = rbf_apply(self.system, self.mesh.vertices)
        out[self.boundary] = rhs
        return out

    def deform(self, wall_displacement: np.ndarray, check: bool = True) -> Mesh:
        """Deformed copy of the baseline; raises DeformationError on inverted elements."""
        wall_displacement = np.asarray(wall_displacement, dtype=float)
        if not np.any(wall_displacement):
            return self.mesh.with_vertices(self.mesh.vertices.copy())
        moved = self.mesh.with_vertices(self.mesh.vertices + self.vertex_displacement(wall_displacement))
        if check:
            report = validate(moved)
            bad = [
                i.element
                for i in report.issues
                if i.kind in INVALID_KINDS
            ]
            if bad:
                raise DeformationError(
                    f"deformation inverted or folded {len(bad)} element(s)",
                    elements=bad,
                    details={"max_wall_displacement": float(np.abs(wall_displacement).max())},
                )
        return moved

    def report(self, deformed: Mesh) -> DeformationReport:
        shift = np.linalg.norm(deformed.vertices - self.mesh.vertices, axis=1)
        return DeformationReport(
            max_displacement=float(shift.max(initial=0.0)),
            min_area_before=float(self.mesh.geometry.area.min()),
            min_area_after=float(deformed.geometry.area.min()),
            inverted_elements=int(np.count_nonzero(deformed.geometry.area <= 0.0)),
        )


def deform_mesh(mesh: Mesh, wall_displacement: np.ndarray, config: RbfConfig = RbfConfig()) -> Mesh:
    """One-shot RBF deformation; wall vertices move exactly by ``wall_displacement``."""
    return MeshMorpher(mesh, config).deform(wall_displacement)
