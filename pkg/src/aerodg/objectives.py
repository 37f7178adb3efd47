"""Drag objective, lift and area constraints, and their state derivatives."""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, List

import numpy as np
import structlog

from .config import ObjectiveConfig, Scheme
from .mesh import Mesh, wall_loops
from .solver.gas import pressure_gradient
from .solver.forces import compute_forces
from .solver.residual import ResidualOperator

logger = structlog.get_logger(__name__)


class Functional(str, Enum):
    DRAG = "cd"
    LIFT = "cl"
    AREA = "area"

    @property
    def state_dependent(self) -> bool:
        return self is not Functional.AREA


def loop_area(points: np.ndarray) -> float:
    """Signed shoelace area of a closed polygon given in loop order."""
    x, y = points[:, 0], points[:, 1]
    return float(0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def area(mesh: Mesh) -> float:
    """Area enclosed by the wall loops, from wall vertex coordinates only."""
    total = sum(loop_area(mesh.vertices[loop]) for loop in wall_loops(mesh))
    if total < 0.0:
        logger.warning("Wall loops are clockwise, returning the absolute area", area=total)
    return abs(total)


@dataclass(frozen=True)
class ObjectiveSpec:
    """Minimize Cd subject to Cl >= cl0 and A >= area0 (each switchable)."""
    cl0: float
    area0: float
    lift_constraint: bool = True
    area_constraint: bool = True
    chord: float = 1.0

    @classmethod
    def capture(cls, cl: float, mesh: Mesh, config: ObjectiveConfig = ObjectiveConfig()) -> "ObjectiveSpec":
        a0 = area(mesh) if config.area_constraint else 0.0
        return cls(
            cl0=cl,
            area0=a0,
            lift_constraint=config.lift_constraint,
            area_constraint=config.area_constraint,
            chord=config.chord,
        )

    @property
    def constraints(self) -> List[Functional]:
        out = []
        if self.lift_constraint:
            out.append(Functional.LIFT)
        if self.area_constraint:
            out.append(Functional.AREA)
        return out


@dataclass(frozen=True)
class ObjectiveValues:
    cd: float
    cl: float
    area: float
    constraints: np.ndarray  # c_I, feasible when <= 0

    def as_dict(self) -> Dict[str, float]:
        return {"Cd": self.cd, "Cl": self.cl, "A": self.area}


def constraint_values(spec: ObjectiveSpec, cl: float, a: float) -> np.ndarray:
    values = {Functional.LIFT: spec.cl0 - cl, Functional.AREA: spec.area0 - a}
    return np.array([values[c] for c in spec.constraints], dtype=float)


def objective_value(U: np.ndarray, operator: ResidualOperator, spec: ObjectiveSpec) -> ObjectiveValues:
    forces = compute_forces(U, operator, spec.chord)
    a = area(operator.mesh) if spec.area_constraint else 0.0
    return ObjectiveValues(cd=forces.cd, cl=forces.cl, area=a, constraints=constraint_values(spec, forces.cl, a))


def functional_value(U: np.ndarray, operator: ResidualOperator, functional: Functional, chord: float = 1.0) -> float:
    if functional is Functional.AREA:
        return area(operator.mesh)
    forces = compute_forces(U, operator, chord)
    return forces.cd if functional is Functional.DRAG else forces.cl


def _force_direction(operator: ResidualOperator, functional: Functional) -> np.ndarray:
    alpha = operator.freestream.alpha
    if functional is Functional.DRAG:
        return np.array([np.cos(alpha), np.sin(alpha)])
    return np.array([-np.sin(alpha), np.cos(alpha)])


def objective_partial_dU(
    U: np.ndarray,
    operator: ResidualOperator,
    functional: Functional = Functional.DRAG,
    chord: float = 1.0,
) -> np.ndarray:
    """dJ/dU with the shape of U; nonzero only on wall-adjacent elements.

    FV2 traces are linearized through the reconstruction with limiter
    factors held at their current values.
    """
    disc = operator.disc
    dJ = np.zeros(disc.shape)
    if not functional.state_dependent or len(disc.wall) == 0:
        return dJ

    fs = operator.freestream
    wall = disc.wall
    u = operator.left_states(U, wall)
    direction = disc.normals[wall] @ _force_direction(operator, functional)
    scale = fs.dynamic_pressure * chord
    # dJ/d(trace) at every wall quadrature point, (n_wall, G, 4)
    g = (disc.faces.weights[wall] * direction[:, None])[:, :, None] * pressure_gradient(u, fs.gamma) / scale

    if disc.scheme is Scheme.FV2:
        recon = operator.recon
        ubar = U[:, 0, :]
        phi = recon.limiter_factors(ubar, recon.gradients(ubar))
        T = recon.trace_operator(phi, wall)
        dJ[:, 0, :] = (T.T @ g.ravel()).reshape(disc.n_elements, 4)
        return dJ

    contrib = np.einsum("fgk,fgm->fkm", disc.phi_l[wall], g)
    np.add.at(dJ, disc.mesh.face_left[wall], contrib)
    return dJ
