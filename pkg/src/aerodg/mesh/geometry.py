"""Per-element and per-face geometric quantities."""

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from ..exceptions import DegenerateElementError

if TYPE_CHECKING:
    from .mesh import Mesh

AREA_FLOOR = 1e-300


@dataclass(frozen=True)
class MeshGeometry:
    """Vectorized geometry cache of a mesh.

    ``area`` is signed: inverted elements show up with a negative value.
    ``face_normal`` is the unit normal pointing out of the face's left element.
    """
    centroid: np.ndarray       # (Ne, 2)
    area: np.ndarray           # (Ne,)
    h: np.ndarray              # (Ne,)
    half_extent: np.ndarray    # (Ne, 2)
    face_normal: np.ndarray    # (F, 2)
    face_length: np.ndarray    # (F,)
    face_midpoint: np.ndarray  # (F, 2)
    moments: np.ndarray        # (Ne, 3) central xx, yy, xy second moments per unit area


@dataclass(frozen=True)
class ElementGeometry:
    """Geometry of one element, normals oriented outward from it."""
    centroid: np.ndarray
    area: float
    h: float
    dx: float
    dy: float
    normals: np.ndarray
    face_lengths: np.ndarray
    moments: np.ndarray


def polygon_area_centroid(points: np.ndarray) -> "tuple[np.ndarray, np.ndarray]":
    """Signed shoelace area and area centroid of polygons given as (..., k, 2)."""
    x, y = points[..., 0], points[..., 1]
    xn, yn = np.roll(x, -1, axis=-1), np.roll(y, -1, axis=-1)
    cross = x * yn - xn * y
    area = 0.5 * cross.sum(axis=-1)
    safe = np.where(np.abs(area) > AREA_FLOOR, area, 1.0)
    cx = ((x + xn) * cross).sum(axis=-1) / (6.0 * safe)
    cy = ((y + yn) * cross).sum(axis=-1) / (6.0 * safe)
    centroid = np.stack([cx, cy], axis=-1)
    degenerate = np.abs(area) <= AREA_FLOOR
    if np.any(degenerate):
        centroid[degenerate] = points[degenerate].mean(axis=-2)
    return area, centroid


def polygon_central_moments(points: np.ndarray, centroid: np.ndarray, area: np.ndarray) -> np.ndarray:
    """Area-normalized central second moments (xx, yy, xy) of polygons (..., k, 2)."""
    local = points - centroid[..., None, :]
    x, y = local[..., 0], local[..., 1]
    xn, yn = np.roll(x, -1, axis=-1), np.roll(y, -1, axis=-1)
    cross = x * yn - xn * y
    ixx = (cross * (x * x + x * xn + xn * xn)).sum(axis=-1) / 12.0
    iyy = (cross * (y * y + y * yn + yn * yn)).sum(axis=-1) / 12.0
    ixy = (cross * (x * yn + 2.0 * x * y + 2.0 * xn * yn + xn * y)).sum(axis=-1) / 24.0
    safe = np.where(np.abs(area) > AREA_FLOOR, area, 1.0)
    return np.stack([ixx, iyy, ixy], axis=-1) / safe[..., None]


def compute_geometry(mesh: "Mesh") -> MeshGeometry:
    corners = mesh.vertices[mesh.element_nodes]
    area, centroid = polygon_area_centroid(corners)
    half_extent = 0.5 * (corners.max(axis=1) - corners.min(axis=1))
    h = np.sqrt(np.abs(area))
    moments = polygon_central_moments(corners, centroid, area)

    a = mesh.vertices[mesh.face_vertices[:, 0]]
    b = mesh.vertices[mesh.face_vertices[:, 1]]
    edge = b - a
    length = np.hypot(edge[:, 0], edge[:, 1])
    normal = np.stack([edge[:, 1], -edge[:, 0]], axis=-1) / np.where(length > 0, length, 1.0)[:, None]

    for arr in (centroid, area, h, half_extent, normal, length, moments):
        arr.setflags(write=False)
    return MeshGeometry(
        centroid=centroid,
        area=area,
        h=h,
        half_extent=half_extent,
        face_normal=normal,
        face_length=length,
        face_midpoint=0.5 * (a + b),
        moments=moments,
    )


def element_geometry(mesh: "Mesh", e: int) -> ElementGeometry:
    """Geometry of element ``e`` with unit outward normals for each of its faces."""
    if not 0 <= e < mesh.n_elements:
        raise IndexError(f"element index {e} out of range")
    geo = mesh.geometry
    area = float(geo.area[e])
    if abs(area) <= 1e-14 * max(1.0, float(np.max(np.abs(mesh.vertices))) ** 2):
        raise DegenerateElementError(e, area)

    faces = np.array(mesh.element_faces(e), dtype=np.int64)
    sign = np.where(mesh.face_left[faces] == e, 1.0, -1.0)
    return ElementGeometry(
        centroid=geo.centroid[e].copy(),
        area=area,
        h=float(geo.h[e]),
        dx=float(geo.half_extent[e, 0]),
        dy=float(geo.half_extent[e, 1]),
        normals=geo.face_normal[faces] * sign[:, None],
        face_lengths=geo.face_length[faces].copy(),
        moments=geo.moments[e].copy(),
    )
