"""Unstructured 2D mesh: vertices, elements, derived faces and boundary patches."""

from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import TYPE_CHECKING, Dict, List, Sequence, Tuple

import numpy as np
import structlog

from ..exceptions import MeshTopologyError

if TYPE_CHECKING:
    from .geometry import MeshGeometry

logger = structlog.get_logger(__name__)

MAX_ELEMENT_VERTICES = 4


class PatchTag(str, Enum):
    """Boundary condition family of a patch."""
    WALL = "wall"
    FARFIELD = "farfield"


@dataclass(frozen=True)
class BoundaryPatch:
    """Named set of boundary faces given as vertex pairs."""
    name: str
    tag: PatchTag
    faces: Tuple[Tuple[int, int], ...]


class Mesh:
    """Immutable mesh; face connectivity is derived from element connectivity.

    Faces are stored with the vertex order of their left element, so the
    outward normal of the left element is the edge direction rotated clockwise.
    Triangles are padded to four nodes by repeating their last vertex, which
    adds a zero-length edge and leaves every polygon formula unchanged.
    """

    def __init__(
        self,
        vertices: np.ndarray,
        elements: Sequence[Sequence[int]],
        patches: Sequence[BoundaryPatch] = (),
    ) -> None:
        self.vertices = np.array(vertices, dtype=float).reshape(-1, 2)
        self.vertices.setflags(write=False)
        self.elements: Tuple[Tuple[int, ...], ...] = tuple(tuple(int(i) for i in el) for el in elements)
        self.patches: Tuple[BoundaryPatch, ...] = tuple(patches)
        self._connect()

    def _connect(self) -> None:
        n_vertices = len(self.vertices)
        issues: List[str] = []

        nodes = np.empty((len(self.elements), MAX_ELEMENT_VERTICES), dtype=np.int64)
        sizes = np.empty(len(self.elements), dtype=np.int64)
        for e, el in enumerate(self.elements):
            if len(el) not in (3, 4):
                issues.append(f"element {e} has {len(el)} vertices (expected 3 or 4)")
                continue
            if min(el) < 0 or max(el) >= n_vertices:
                issues.append(f"element {e} references a vertex outside [0, {n_vertices})")
                continue
            if len(set(el)) != len(el):
                issues.append(f"element {e} repeats a vertex")
                continue
            sizes[e] = len(el)
            nodes[e, : len(el)] = el
            nodes[e, len(el):] = el[-1]
        if issues:
            raise MeshTopologyError("invalid element connectivity", issues=issues)

        edge_index: Dict[Tuple[int, int], int] = {}
        face_vertices: List[Tuple[int, int]] = []
        face_left: List[int] = []
        face_right: List[int] = []
        conflicts: List[int] = []
        element_faces: List[List[int]] = []

        for e, el in enumerate(self.elements):
            own: List[int] = []
            for k in range(len(el)):
                a, b = el[k], el[(k + 1) % len(el)]
                key = (min(a, b), max(a, b))
                f = edge_index.get(key)
                if f is None:
                    f = len(face_vertices)
                    edge_index[key] = f
                    face_vertices.append((a, b))
                    face_left.append(e)
                    face_right.append(-1)
                elif face_right[f] == -1 and face_left[f] != e:
                    face_right[f] = e
                    if face_vertices[f] != (b, a):
                        conflicts.append(f)
                else:
                    issues.append(f"edge {key} is shared by more than two elements (element {e})")
                own.append(f)
            element_faces.append(own)
        if issues:
            raise MeshTopologyError("non-manifold mesh", issues=issues)

        face_patch = np.full(len(face_vertices), -1, dtype=np.int64)
        for p, patch in enumerate(self.patches):
            for a, b in patch.faces:
                f = edge_index.get((min(a, b), max(a, b)))
                if f is None:
                    issues.append(f"patch '{patch.name}' face ({a}, {b}) is not an edge of the mesh")
                    continue
                face_patch[f] = p
        if issues:
            raise MeshTopologyError("boundary patch does not match the mesh", issues=issues)

        self.element_nodes = nodes
        self.element_sizes = sizes
        self.face_vertices = np.array(face_vertices, dtype=np.int64).reshape(-1, 2)
        self.face_left = np.array(face_left, dtype=np.int64)
        self.face_right = np.array(face_right, dtype=np.int64)
        self.face_patch = face_patch
        self.orientation_conflicts = tuple(conflicts)
        self._element_faces = tuple(tuple(fs) for fs in element_faces)
        for arr in (nodes, sizes, self.face_vertices, self.face_left, self.face_right, self.face_patch):
            arr.setflags(write=False)

    def with_vertices(self, vertices: np.ndarray) -> "Mesh":
        """Same topology, displaced vertices."""
        vertices = np.array(vertices, dtype=float).reshape(self.vertices.shape)
        clone = object.__new__(Mesh)
        clone.__dict__.update(
            {k: v for k, v in self.__dict__.items() if k not in _CACHED_ATTRIBUTES}
        )
        vertices.setflags(write=False)
        clone.vertices = vertices
        return clone

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def n_faces(self) -> int:
        return len(self.face_vertices)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def element_faces(self, e: int) -> Tuple[int, ...]:
        return self._element_faces[e]

    @cached_property
    def interior_faces(self) -> np.ndarray:
        return np.flatnonzero(self.face_right >= 0)

    @cached_property
    def boundary_faces(self) -> np.ndarray:
        return np.flatnonzero(self.face_right < 0)

    def patch_tag_of_faces(self) -> np.ndarray:
        """Per-face tag string ('' for interior or unpatched faces)."""
        tags = np.array([p.tag.value for p in self.patches] + [""], dtype=object)
        return tags[self.face_patch]

    def faces_with_tag(self, tag: PatchTag) -> np.ndarray:
        ids = [p for p, patch in enumerate(self.patches) if patch.tag is tag]
        return np.flatnonzero(np.isin(self.face_patch, ids) & (self.face_right < 0))

    @cached_property
    def wall_faces(self) -> np.ndarray:
        return self.faces_with_tag(PatchTag.WALL)

    @cached_property
    def farfield_faces(self) -> np.ndarray:
        return self.faces_with_tag(PatchTag.FARFIELD)

    @cached_property
    def wall_vertices(self) -> np.ndarray:
        return np.unique(self.face_vertices[self.wall_faces])

    @cached_property
    def boundary_vertices(self) -> np.ndarray:
        """Every vertex on any patched boundary face."""
        patched = self.boundary_faces[self.face_patch[self.boundary_faces] >= 0]
        return np.unique(self.face_vertices[patched])

    @cached_property
    def geometry(self) -> "MeshGeometry":
        from .geometry import compute_geometry

        return compute_geometry(self)

    @cached_property
    def neighbors(self) -> Tuple[np.ndarray, ...]:
        """Face neighbours of every element."""
        nbrs: List[List[int]] = [[] for _ in range(self.n_elements)]
        for f in self.interior_faces:
            left, right = int(self.face_left[f]), int(self.face_right[f])
            nbrs[left].append(right)
            nbrs[right].append(left)
        return tuple(np.array(sorted(n), dtype=np.int64) for n in nbrs)

    def __repr__(self) -> str:
        return (
            f"Mesh(vertices={self.n_vertices}, elements={self.n_elements}, "
            f"faces={self.n_faces}, patches={[p.name for p in self.patches]})"
        )


_CACHED_ATTRIBUTES = {
    "geometry",
    "interior_faces",
    "boundary_faces",
    "wall_faces",
    "farfield_faces",
    "wall_vertices",
    "boundary_vertices",
    "neighbors",
}


def wall_loops(mesh: Mesh) -> List[np.ndarray]:
    """Ordered wall loops with the body on the left (counter-clockwise around a body)."""
    successor: Dict[int, int] = {}
    for a, b in mesh.face_vertices[mesh.wall_faces]:
        # faces follow the fluid element; reversing puts the body on the left
        if int(b) in successor:
            raise MeshTopologyError("wall patch is not a set of simple loops", issues=[f"vertex {b} branches"])
        successor[int(b)] = int(a)

    loops: List[np.ndarray] = []
    remaining = set(successor)
    while remaining:
        start = min(remaining)
        loop = [start]
        seen = {start}
        current = successor[start]
        while current != start:
            if current not in successor or current not in remaining or current in seen:
                raise MeshTopologyError("open wall loop", issues=[f"wall chain breaks at vertex {current}"])
            loop.append(current)
            seen.add(current)
            current = successor[current]
        remaining.difference_update(loop)
        loops.append(np.array(loop, dtype=np.int64))
    return loops

