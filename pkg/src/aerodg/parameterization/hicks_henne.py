"""Hicks-Henne bump functions on the wall of a single airfoil."""

from typing import List, Optional, Tuple

import numpy as np
import structlog

from ..config import HicksHenneConfig
from ..exceptions import MeshTopologyError, ParameterizationError
from ..mesh import Mesh, wall_loops
from .design import Parameterization

logger = structlog.get_logger(__name__)

CHORD_TOL = 1e-12


def bump_peaks(n_bumps: int) -> np.ndarray:
    """Cosine-spaced peak locations p_k = 0.5 (1 - cos(k pi / (N + 1))), k = 1..N."""
    k = np.arange(1, n_bumps + 1)
    return 0.5 * (1.0 - np.cos(k * np.pi / (n_bumps + 1)))


class HicksHenneParam(Parameterization):
    """Bumps sin^t(pi x^beta_k) added to the y-coordinate of each wall vertex.

    x is the chord-normalized abscissa. A vertex belongs to the upper side when
    it lies on or above the chord line. The design vector holds the N upper
    amplitudes followed by the N lower ones.
    """

    def __init__(
        self,
        mesh: Mesh,
        config: HicksHenneConfig = HicksHenneConfig(),
        chord: Optional[Tuple[Tuple[float, float], Tuple[float, float]]] = None,
    ) -> None:
        self.config = config
        self.exponent = float(config.exponent)
        self.peaks = bump_peaks(config.n_bumps)
        self.betas = np.log(0.5) / np.log(self.peaks)

        self.wall_vertices = mesh.wall_vertices
        if not len(self.wall_vertices):
            raise ParameterizationError("mesh has no wall vertices")
        try:
            n_loops = len(wall_loops(mesh))
        except MeshTopologyError as exc:
            raise ParameterizationError("wall patch is not closed", details=exc.details) from exc
        if n_loops != 1:
            raise ParameterizationError("Hicks-Henne bumps need a single closed wall loop", details={"loops": n_loops})
        points = mesh.vertices[self.wall_vertices]
        if chord is None:
            le = points[np.argmin(points[:, 0])]
            te = points[np.argmax(points[:, 0])]
        else:
            le, te = np.asarray(chord[0], dtype=float), np.asarray(chord[1], dtype=float)
        self.leading_edge, self.trailing_edge = le, te

        axis = te - le
        length2 = float(axis @ axis)
        if length2 <= 0.0:
            raise ParameterizationError("degenerate chord line")
        x = (points - le) @ axis / length2
        off = np.flatnonzero((x < -CHORD_TOL) | (x > 1.0 + CHORD_TOL))
        if len(off):
            raise ParameterizationError(
                "wall vertices fall outside the chord after normalization",
                details={"vertices": self.wall_vertices[off][:20].tolist()},
            )
        self.x = np.clip(x, 0.0, 1.0)
        cross = axis[0] * (points[:, 1] - le[1]) - axis[1] * (points[:, 0] - le[0])
        self.upper = cross >= 0.0
        self.baseline_y = points[:, 1].copy()

        n = config.n_bumps
        basis = self.basis(self.x)
        modes = np.zeros((len(points), 2, 2 * n))
        modes[self.upper, 1, :n] = basis[self.upper]
        modes[~self.upper, 1, n:] = basis[~self.upper]
        modes.setflags(write=False)
        self._modes = modes
        logger.info(
            "Hicks-Henne bumps placed",
            bumps=n,
            exponent=self.exponent,
            upper_vertices=int(self.upper.sum()),
            lower_vertices=int((~self.upper).sum()),
        )

    def basis(self, x: np.ndarray) -> np.ndarray:
        """All bumps at chordwise positions ``x``; shape (len(x), N)."""
        x = np.clip(np.atleast_1d(np.asarray(x, dtype=float)), 0.0, 1.0)
        return np.sin(np.pi * x[:, None] ** self.betas[None, :]) ** self.exponent

    @property
    def n_bumps(self) -> int:
        return len(self.peaks)

    @property
    def n_design(self) -> int:
        return 2 * self.n_bumps

    @property
    def modes(self) -> np.ndarray:
        return self._modes

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        limit = np.full(self.n_design, self.config.bound)
        return -limit, limit

    def names(self) -> List[str]:
        return [f"{side}{k}" for side in ("upper", "lower") for k in range(self.n_bumps)]


def hh_basis(x: float, i: int, param: HicksHenneParam) -> float:
    """Bump ``i`` (0-based) at chordwise position ``x``; peaks at 1 for x = p_i."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"chordwise position {x} outside [0, 1]")
    return float(np.sin(np.pi * x ** param.betas[i]) ** param.exponent)


def hh_deform(param: HicksHenneParam, delta: np.ndarray) -> np.ndarray:
    return param.displacement(delta)
