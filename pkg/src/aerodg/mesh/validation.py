"""Mesh invariant checks that report instead of raising."""

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

import numpy as np
import structlog

from ..exceptions import MeshTopologyError
from .mesh import Mesh, wall_loops

logger = structlog.get_logger(__name__)

CLOSURE_TOL = 1e-12


class IssueKind(str, Enum):
    INVERTED_ELEMENT = "inverted_element"
    DEGENERATE_ELEMENT = "degenerate_element"
    NON_CONVEX_ELEMENT = "non_convex_element"
    ORIENTATION = "orientation"
    OPEN_WALL = "open_wall"
    WALL_CLOSURE = "wall_closure"
    UNPATCHED_FACE = "unpatched_face"
    AREA_MISMATCH = "area_mismatch"


@dataclass(frozen=True)
class ValidationIssue:
    kind: IssueKind
    message: str
    element: Optional[int] = None
    face: Optional[int] = None


@dataclass
class ValidationReport:
    """Invariant violations found in a mesh; empty means valid."""
    issues: List[ValidationIssue] = field(default_factory=list)

    def __bool__(self) -> bool:
        return bool(self.issues)

    def __len__(self) -> int:
        return len(self.issues)

    @property
    def ok(self) -> bool:
        return not self.issues

    def of_kind(self, kind: IssueKind) -> List[ValidationIssue]:
        return [i for i in self.issues if i.kind is kind]

    @property
    def elements(self) -> List[int]:
        return sorted({i.element for i in self.issues if i.element is not None})

    def lines(self) -> List[str]:
        return [f"{i.kind.value}: {i.message}" for i in self.issues]


def validate(mesh: Mesh) -> ValidationReport:
    """Check every mesh invariant and list the violations."""
    report = ValidationReport()
    geo = mesh.geometry
    scale = max(1.0, float(np.max(np.abs(mesh.vertices)))) if mesh.n_vertices else 1.0

    for e in np.flatnonzero(geo.area <= 0.0):
        kind = IssueKind.DEGENERATE_ELEMENT if geo.area[e] == 0.0 else IssueKind.INVERTED_ELEMENT
        report.issues.append(
            ValidationIssue(kind, f"element {e} has signed area {geo.area[e]:.6e}", element=int(e))
        )

    for e in _non_convex_quads(mesh, scale):
        report.issues.append(
            ValidationIssue(IssueKind.NON_CONVEX_ELEMENT, f"quadrilateral {e} has a reflex corner", element=int(e))
        )

    for f in mesh.orientation_conflicts:
        report.issues.append(
            ValidationIssue(
                IssueKind.ORIENTATION,
                f"face {f} is traversed in the same direction by elements "
                f"{mesh.face_left[f]} and {mesh.face_right[f]}",
                face=int(f),
            )
        )

    for f in mesh.boundary_faces[mesh.face_patch[mesh.boundary_faces] < 0]:
        report.issues.append(
            ValidationIssue(IssueKind.UNPATCHED_FACE, f"boundary face {f} belongs to no patch", face=int(f))
        )

    if len(mesh.wall_faces):
        try:
            wall_loops(mesh)
        except MeshTopologyError as exc:
            detail = "; ".join(exc.details.get("issues", [])) or exc.message
            report.issues.append(ValidationIssue(IssueKind.OPEN_WALL, f"wall patch is not closed: {detail}"))
        closure = (geo.face_normal[mesh.wall_faces] * geo.face_length[mesh.wall_faces, None]).sum(axis=0)
        if np.max(np.abs(closure)) > CLOSURE_TOL * scale:
            report.issues.append(
                ValidationIssue(
                    IssueKind.WALL_CLOSURE,
                    f"wall normals do not sum to zero: ({closure[0]:.3e}, {closure[1]:.3e})",
                )
            )

    total = _enclosed_area(mesh)
    summed = float(np.sum(geo.area))
    if abs(total - summed) > 1e-12 * max(abs(total), 1.0):
        report.issues.append(
            ValidationIssue(IssueKind.AREA_MISMATCH, f"boundary encloses {total:.15g}, elements sum to {summed:.15g}")
        )

    if report.issues:
        logger.warning("Mesh validation found issues", count=len(report.issues))
    return report


def _non_convex_quads(mesh: Mesh, scale: float) -> np.ndarray:
    """Positive-area quadrilaterals with a corner turning clockwise."""
    nodes = mesh.element_nodes
    quads = np.flatnonzero((nodes[:, 3] != nodes[:, 2]) & (mesh.geometry.area > 0.0))
    if not len(quads):
        return quads
    corners = mesh.vertices[nodes[quads]]  # (Nq, 4, 2)
    edges = np.roll(corners, -1, axis=1) - corners
    nxt = np.roll(edges, -1, axis=1)
    turn = edges[..., 0] * nxt[..., 1] - edges[..., 1] * nxt[..., 0]
    return quads[np.any(turn < -CLOSURE_TOL * scale**2, axis=1)]


def _enclosed_area(mesh: Mesh) -> float:
    """Area enclosed by the boundary faces (divergence theorem on x)."""
    faces = mesh.boundary_faces
    if not len(faces):
        return 0.0
    geo = mesh.geometry
    nx_len = geo.face_normal[faces, 0] * geo.face_length[faces]
    return float(np.sum(geo.face_midpoint[faces, 0] * nx_len))
