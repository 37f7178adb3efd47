"""Design vectors and the common interface of surface parameterizations."""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ..exceptions import ParameterizationError


@dataclass
class DesignVector:
    """Design variables with per-entry box bounds."""
    values: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    names: List[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float).copy()
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        n = self.values.shape
        if self.values.ndim != 1 or self.lower.shape != n or self.upper.shape != n:
            raise ParameterizationError(
                "design vector and bounds must be 1-D arrays of equal length",
                details={"values": n, "lower": self.lower.shape, "upper": self.upper.shape},
            )
        if np.any(self.lower > self.upper):
            raise ParameterizationError("lower bound exceeds upper bound")
        if not self.names:
            self.names = [f"d{i}" for i in range(len(self.values))]

    def __len__(self) -> int:
        return len(self.values)

    def within_bounds(self, tol: float = 0.0) -> bool:
        return bool(np.all(self.values >= self.lower - tol) and np.all(self.values <= self.upper + tol))

    def clipped(self) -> "DesignVector":
        return self.with_values(np.clip(self.values, self.lower, self.upper))

    def with_values(self, values: np.ndarray) -> "DesignVector":
        values = np.asarray(values, dtype=float)
        if values.shape != self.values.shape:
            raise ParameterizationError(
                f"design vector has length {len(self.values)}, got {values.size}"
            )
        return DesignVector(values, self.lower, self.upper, list(self.names))


class Parameterization(ABC):
    """Linear map from a design vector to wall-vertex displacements."""

    #: mesh indices of the vertices the parameterization moves
    wall_vertices: np.ndarray

    @property
    @abstractmethod
    def n_design(self) -> int: ...

    @property
    @abstractmethod
    def modes(self) -> np.ndarray:
        """Displacement per unit design variable, shape (n_wall, 2, n_design)."""

    @abstractmethod
    def bounds(self) -> "tuple[np.ndarray, np.ndarray]": ...

    def step_scales(self) -> np.ndarray:
        """Natural length scale of each design variable, used to size FD steps."""
        lower, upper = self.bounds()
        return upper - lower

    def names(self) -> List[str]:
        return [f"d{i}" for i in range(self.n_design)]

    def initial(self, values: Optional[np.ndarray] = None) -> DesignVector:
        lower, upper = self.bounds()
        if values is None:
            values = np.zeros(self.n_design)
        return DesignVector(values, lower, upper, self.names())

    def displacement(self, delta: np.ndarray) -> np.ndarray:
        """Wall displacements (n_wall, 2) for design vector ``delta``."""
        delta = np.asarray(getattr(delta, "values", delta), dtype=float)
        if delta.shape != (self.n_design,):
            raise ParameterizationError(
                f"design vector length {delta.size} does not match {self.n_design} design variables"
            )
        return self.modes @ delta
