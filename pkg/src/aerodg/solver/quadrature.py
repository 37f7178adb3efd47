"""Volume and face quadrature on straight-sided elements."""

from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from ..mesh import Mesh

# symmetric triangle rules: (barycentric orbits, weights), weights sum to 1
_A4, _B4 = 0.445948490915965, 0.091576213509771
_A5, _B5 = 0.470142064105115, 0.101286507323456


def _orbit(a: float) -> np.ndarray:
    b = 1.0 - 2.0 * a
    return np.array([[a, a, b], [a, b, a], [b, a, a]])


TRIANGLE_RULES: Dict[int, Tuple[np.ndarray, np.ndarray]] = {
    1: (np.array([[1 / 3, 1 / 3, 1 / 3]]), np.array([1.0])),
    2: (_orbit(1 / 6), np.full(3, 1 / 3)),
    4: (
        np.vstack([_orbit(_A4), _orbit(_B4)]),
        np.concatenate([np.full(3, 0.223381589678011), np.full(3, 0.109951743655322)]),
    ),
    5: (
        np.vstack([[[1 / 3, 1 / 3, 1 / 3]], _orbit(_A5), _orbit(_B5)]),
        np.concatenate([[0.225], np.full(3, 0.132394152788506), np.full(3, 0.125939180544827)]),
    ),
}


def triangle_rule(degree: int) -> Tuple[np.ndarray, np.ndarray]:
    """Smallest tabulated rule exact to ``degree``."""
    for d in sorted(TRIANGLE_RULES):
        if d >= degree:
            return TRIANGLE_RULES[d]
    raise ValueError(f"no triangle rule of degree {degree}")


def line_rule(n_points: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n_points)
    return 0.5 * (x + 1.0), 0.5 * w


@dataclass(frozen=True)
class VolumeQuadrature:
    """Points and weights per element.

    Quadrilaterals are split into the fan (0, 1, 2), (0, 2, 3), exact only for
    convex quads, which mesh validation enforces. A padded triangle's second
    sub-triangle has zero area and contributes nothing.
    ``vertices`` and ``bary`` let vertex fields be interpolated linearly.
    """
    points: np.ndarray   # (Ne, Q, 2)
    weights: np.ndarray  # (Ne, Q), sums to the element area
    vertices: np.ndarray  # (Ne, Q, 3) mesh vertex ids of the sub-triangle
    bary: np.ndarray     # (Q, 3)


@dataclass(frozen=True)
class FaceQuadrature:
    points: np.ndarray   # (F, G, 2)
    weights: np.ndarray  # (F, G), sums to the face length
    s: np.ndarray        # (G,) position along the face from its first vertex


def volume_quadrature(mesh: Mesh, degree: int) -> VolumeQuadrature:
    bary, w = triangle_rule(degree)
    nodes = mesh.element_nodes
    fans = (nodes[:, [0, 1, 2]], nodes[:, [0, 2, 3]])
    points, weights, vertex_ids = [], [], []
    for tri in fans:
        corners = mesh.vertices[tri]  # (Ne, 3, 2)
        d1 = corners[:, 1] - corners[:, 0]
        d2 = corners[:, 2] - corners[:, 0]
        sub_area = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
        points.append(np.einsum("qk,ekd->eqd", bary, corners))
        weights.append(sub_area[:, None] * w[None, :])
        vertex_ids.append(np.repeat(tri[:, None, :], len(w), axis=1))
    return VolumeQuadrature(
        points=np.concatenate(points, axis=1),
        weights=np.concatenate(weights, axis=1),
        vertices=np.concatenate(vertex_ids, axis=1),
        bary=np.vstack([bary, bary]),
    )


def face_quadrature(mesh: Mesh, n_points: int) -> FaceQuadrature:
    s, w = line_rule(n_points)
    a = mesh.vertices[mesh.face_vertices[:, 0]]
    b = mesh.vertices[mesh.face_vertices[:, 1]]
    points = a[:, None, :] + s[None, :, None] * (b - a)[:, None, :]
    length = mesh.geometry.face_length
    return FaceQuadrature(points=points, weights=length[:, None] * w[None, :], s=s)
