"""Mesh builders for fixtures and the offline generation script."""

from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np
import structlog
from scipy.optimize import brentq

from ..exceptions import MeshTopologyError
from .mesh import BoundaryPatch, Mesh, PatchTag

logger = structlog.get_logger(__name__)

SIDES = ("bottom", "right", "top", "left")


def rectangle(
    nx: int,
    ny: int,
    bounds: Tuple[float, float, float, float] = (0.0, 0.0, 1.0, 1.0),
    triangles: bool = False,
    jitter: float = 0.0,
    seed: int = 0,
    tags: Optional[Mapping[str, PatchTag]] = None,
) -> Mesh:
    """Structured grid of ``nx`` by ``ny`` cells on ``bounds = (xmin, ymin, xmax, ymax)``.

    ``jitter`` moves interior vertices by up to that fraction of the cell size.
    Each side is its own patch (default tag farfield).
    """
    if nx < 1 or ny < 1:
        raise ValueError("rectangle needs at least one cell per direction")
    xmin, ymin, xmax, ymax = bounds
    x = np.linspace(xmin, xmax, nx + 1)
    y = np.linspace(ymin, ymax, ny + 1)
    xx, yy = np.meshgrid(x, y, indexing="ij")
    vertices = np.column_stack([xx.ravel(), yy.ravel()])

    def vid(i: int, j: int) -> int:
        return i * (ny + 1) + j

    if jitter > 0.0:
        rng = np.random.default_rng(seed)
        h = min((xmax - xmin) / nx, (ymax - ymin) / ny)
        interior = [vid(i, j) for i in range(1, nx) for j in range(1, ny)]
        vertices[interior] += jitter * h * rng.uniform(-0.5, 0.5, size=(len(interior), 2))

    elements: List[Tuple[int, ...]] = []
    for i in range(nx):
        for j in range(ny):
            a, b, c, d = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
            if triangles:
                elements.extend([(a, b, c), (a, c, d)])
            else:
                elements.append((a, b, c, d))

    sides: Dict[str, List[Tuple[int, int]]] = {
        "bottom": [(vid(i, 0), vid(i + 1, 0)) for i in range(nx)],
        "right": [(vid(nx, j), vid(nx, j + 1)) for j in range(ny)],
        "top": [(vid(i + 1, ny), vid(i, ny)) for i in range(nx)],
        "left": [(vid(0, j + 1), vid(0, j)) for j in range(ny)],
    }
    tags = dict(tags or {})
    unknown = set(tags) - set(SIDES)
    if unknown:
        raise ValueError(f"unknown rectangle sides: {sorted(unknown)}")
    patches = [BoundaryPatch(s, tags.get(s, PatchTag.FARFIELD), tuple(sides[s])) for s in SIDES]
    return Mesh(vertices, elements, patches)


def naca4(code: str, x: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """Points of a NACA 4-digit section with a closed trailing edge.

    ``upper`` selects the suction or pressure side per abscissa.
    """
    if len(code) != 4 or not code.isdigit():
        raise ValueError(f"'{code}' is not a NACA 4-digit designation")
    m = int(code[0]) / 100.0
    p = int(code[1]) / 10.0
    t = int(code[2:]) / 100.0

    yt = 5.0 * t * (
        0.2969 * np.sqrt(x) - 0.1260 * x - 0.3516 * x**2 + 0.2843 * x**3 - 0.1036 * x**4
    )
    if m > 0.0 and 0.0 < p < 1.0:
        front = x < p
        yc = np.where(front, m / p**2 * (2 * p * x - x**2), m / (1 - p) ** 2 * (1 - 2 * p + 2 * p * x - x**2))
        slope = np.where(front, 2 * m / p**2 * (p - x), 2 * m / (1 - p) ** 2 * (p - x))
    else:
        yc = np.zeros_like(x)
        slope = np.zeros_like(x)
    phi = np.arctan(slope)
    sign = np.where(upper, 1.0, -1.0)
    return np.column_stack([x - sign * yt * np.sin(phi), yc + sign * yt * np.cos(phi)])


def geometric_distribution(n: int, first: float) -> np.ndarray:
    """``n + 1`` points on [0, 1] whose first interval is ``first`` and grow geometrically."""
    if n < 1:
        raise ValueError("need at least one interval")
    if first * n >= 1.0:
        return np.linspace(0.0, 1.0, n + 1)

    def mismatch(r: float) -> float:
        return (r - 1.0) / (r**n - 1.0) - first

    ratio = brentq(mismatch, 1.0 + 1e-12, 100.0)
    s = (ratio ** np.arange(n + 1) - 1.0) / (ratio**n - 1.0)
    s[-1] = 1.0
    return s


def _o_grid(wall: np.ndarray, outer: np.ndarray, radial: np.ndarray, wall_name: str) -> Mesh:
    """Quad O-grid blending a closed inner loop into a closed outer loop."""
    n_around = len(wall)
    n_layers = len(radial) - 1
    vertices = wall[:, None, :] + radial[None, :, None] * (outer - wall)[:, None, :]
    vertices = vertices.reshape(-1, 2)

    def vid(i: int, j: int) -> int:
        return (i % n_around) * (n_layers + 1) + j

    elements = []
    for i in range(n_around):
        for j in range(n_layers):
            quad = (vid(i, j), vid(i, j + 1), vid(i + 1, j + 1), vid(i + 1, j))
            pts = vertices[list(quad)]
            area = 0.5 * np.sum(pts[:, 0] * np.roll(pts[:, 1], -1) - np.roll(pts[:, 0], -1) * pts[:, 1])
            elements.append(quad if area > 0.0 else quad[::-1])

    patches = [
        BoundaryPatch(wall_name, PatchTag.WALL, tuple((vid(i + 1, 0), vid(i, 0)) for i in range(n_around))),
        BoundaryPatch(
            "farfield", PatchTag.FARFIELD, tuple((vid(i, n_layers), vid(i + 1, n_layers)) for i in range(n_around))
        ),
    ]
    return Mesh(vertices, elements, patches)


def naca_omesh(
    code: str = "0012",
    n_around: int = 128,
    n_radial: int = 24,
    radius: float = 20.0,
    first_spacing: float = 2e-3,
) -> Mesh:
    """O-mesh of quadrilaterals around a NACA 4-digit section of unit chord.

    Wall points follow a cosine distribution in x, ordered counter-clockwise
    from the trailing edge; the outer boundary is a circle about mid-chord.
    """
    if n_around < 8 or n_around % 2:
        raise ValueError("n_around must be an even number >= 8")
    theta = 2.0 * np.pi * np.arange(n_around) / n_around
    x = 0.5 * (1.0 + np.cos(theta))
    wall = naca4(code, x, upper=theta <= np.pi)
    wall[0] = (1.0, 0.0)

    centre = np.array([0.5, 0.0])
    outer = centre + radius * np.column_stack([np.cos(theta), np.sin(theta)])
    radial = geometric_distribution(n_radial, first_spacing / (radius - 0.5))

    mesh = _o_grid(wall, outer, radial, "wall")
    if np.any(mesh.geometry.area <= 0.0):
        raise MeshTopologyError("generated O-mesh has inverted elements", issues=[f"naca {code}"])
    logger.info("NACA O-mesh generated", code=code, elements=mesh.n_elements, radius=radius)
    return mesh


def _square_loop(half: float, per_side: int) -> np.ndarray:
    """Counter-clockwise points on a square centred at the origin."""
    s = np.linspace(-half, half, per_side + 1)[:-1]
    bottom = np.column_stack([s, np.full_like(s, -half)])
    right = np.column_stack([np.full_like(s, half), s])
    top = np.column_stack([-s, np.full_like(s, half)])
    left = np.column_stack([np.full_like(s, -half), -s])
    return np.vstack([bottom, right, top, left])


def square_hole(inner: float = 0.5, outer: float = 2.0, per_side: int = 4, n_radial: int = 4) -> Mesh:
    """Square wall of half-width ``inner`` inside a square far field of half-width ``outer``."""
    if not 0.0 < inner < outer:
        raise ValueError("need 0 < inner < outer")
    radial = np.linspace(0.0, 1.0, n_radial + 1)
    return _o_grid(_square_loop(inner, per_side), _square_loop(outer, per_side), radial, "wall")
