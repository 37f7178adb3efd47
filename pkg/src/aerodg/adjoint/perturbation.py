"""Finite-difference step sizes for the grid partials."""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import structlog

from ..config import AdjointConfig, StepMode
from ..exceptions import AdjointError, DeformationError
from ..mesh import Mesh
from ..parameterization import DesignVector
from .chain import DesignChain

logger = structlog.get_logger(__name__)


@dataclass
class PerturbationPlan:
    """One positive step per design variable.

    ``meshes[i]`` holds the (plus, minus) deformed meshes once the plan has
    been checked against a design chain.
    """
    steps: np.ndarray
    mode: StepMode = StepMode.DETERMINISTIC
    seed: int = 0
    halvings: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    meshes: List[Tuple[Mesh, Mesh]] = field(default_factory=list, repr=False)

    def __post_init__(self) -> None:
        self.steps = np.asarray(self.steps, dtype=float)
        if np.any(self.steps <= 0.0) or not np.all(np.isfinite(self.steps)):
            raise AdjointError("perturbation steps must be positive and finite")
        if len(self.halvings) != len(self.steps):
            self.halvings = np.zeros(len(self.steps), dtype=int)

    def __len__(self) -> int:
        return len(self.steps)

    def unit(self, i: int) -> np.ndarray:
        """The perturbation Delta D_i as a full design-space vector."""
        e = np.zeros(len(self.steps))
        e[i] = self.steps[i]
        return e


def base_steps(values: np.ndarray, scales: np.ndarray, sigma_rel: float) -> np.ndarray:
    return sigma_rel * np.maximum(np.abs(values), scales)


def make_perturbation_plan(
    D: DesignVector,
    scales: np.ndarray,
    sigma_rel: float = 1e-6,
    mode: StepMode = StepMode.DETERMINISTIC,
    seed: int = 0,
    chain: Optional[DesignChain] = None,
    max_halvings: int = 8,
) -> PerturbationPlan:
    """Steps sigma_rel * max(|D_i|, scale_i), optionally drawn as |N(0, sigma_i^2)|.

    With a ``chain`` every step is checked by deforming to D +/- Delta_i and
    halved until both meshes are valid.
    """
    if sigma_rel <= 0.0:
        raise AdjointError("sigma_rel must be positive", details={"sigma_rel": sigma_rel})
    scales = np.asarray(scales, dtype=float)
    if scales.shape != D.values.shape:
        raise AdjointError("one step scale per design variable is required")

    sigma = base_steps(D.values, scales, sigma_rel)
    if mode is StepMode.RANDOM:
        rng = np.random.default_rng(seed)
        # keep steps away from zero so the difference quotient stays meaningful
        steps = np.maximum(np.abs(rng.normal(0.0, sigma)), 1e-3 * sigma)
    else:
        steps = sigma
    plan = PerturbationPlan(steps, mode=StepMode(mode), seed=seed)
    if chain is None:
        return plan
    return check_plan(plan, D.values, chain, max_halvings)


def check_plan(plan: PerturbationPlan, values: np.ndarray, chain: DesignChain, max_halvings: int = 8) -> PerturbationPlan:
    steps = plan.steps.copy()
    halvings = np.zeros(len(steps), dtype=int)
    meshes: List[Tuple[Mesh, Mesh]] = []
    for i in range(len(steps)):
        while True:
            e = np.zeros(len(steps))
            e[i] = steps[i]
            try:
                pair = (chain.mesh_at(values + e), chain.mesh_at(values - e))
                break
            except DeformationError as exc:
                if halvings[i] >= max_halvings:
                    raise AdjointError(
                        f"no valid perturbation step for design variable {i}",
                        details={"variable": i, "step": float(steps[i]), "elements": exc.details.get("elements")},
                    ) from exc
                steps[i] *= 0.5
                halvings[i] += 1
        if halvings[i]:
            logger.warning("Perturbation step halved", variable=i, halvings=int(halvings[i]), step=float(steps[i]))
        meshes.append(pair)
    return PerturbationPlan(steps, mode=plan.mode, seed=plan.seed, halvings=halvings, meshes=meshes)


def plan_from_config(D: DesignVector, scales: np.ndarray, config: AdjointConfig, chain: Optional[DesignChain] = None) -> PerturbationPlan:
    return make_perturbation_plan(
        D,
        scales,
        sigma_rel=config.sigma_rel,
        mode=config.step_mode,
        seed=config.seed,
        chain=chain,
        max_halvings=config.max_halvings,
    )
