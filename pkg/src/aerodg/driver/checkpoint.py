"""Per-iteration optimizer checkpoints: ``<run>/iter_XXXX/checkpoint.npz`` plus history."""

import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd
import structlog

from ..exceptions import CheckpointError
from ..objectives import ObjectiveSpec, ObjectiveValues
from ..optimizer import OptimizerState
from .outputs import write_table

logger = structlog.get_logger(__name__)

CHECKPOINT_NAME = "checkpoint.npz"
HISTORY_NAME = "history.csv"
ITERATION_DIR = re.compile(r"^iter_(\d{4,})$")

_OPT_PREFIX = "opt_"


def iteration_dir(run_dir: Union[str, Path], k: int) -> Path:
    return Path(run_dir) / f"iter_{k:04d}"


@dataclass
class Checkpoint:
    state: OptimizerState
    U: np.ndarray
    vertices: np.ndarray
    spec: ObjectiveSpec
    objective: ObjectiveValues
    total_steps: int

    @property
    def iteration(self) -> int:
        return self.state.iteration


def save_checkpoint(run_dir: Union[str, Path], checkpoint: Checkpoint) -> Path:
    """Write atomically; an interrupted write never replaces a good checkpoint."""
    directory = iteration_dir(run_dir, checkpoint.iteration)
    directory.mkdir(parents=True, exist_ok=True)
    spec, obj = checkpoint.spec, checkpoint.objective
    arrays = {_OPT_PREFIX + key: value for key, value in checkpoint.state.arrays().items()}
    arrays.update(
        U=checkpoint.U,
        vertices=checkpoint.vertices,
        spec=np.array([spec.cl0, spec.area0, spec.chord]),
        spec_flags=np.array([spec.lift_constraint, spec.area_constraint]),
        objective=np.array([obj.cd, obj.cl, obj.area]),
        constraints=obj.constraints,
        total_steps=np.array(checkpoint.total_steps),
    )
    target = directory / CHECKPOINT_NAME
    tmp = directory / (CHECKPOINT_NAME + ".tmp")
    try:
        with open(tmp, "wb") as handle:
            np.savez(handle, **arrays)
        os.replace(tmp, target)
    except OSError as exc:
        raise CheckpointError(f"cannot write checkpoint: {exc}", path=str(target)) from exc
    write_table(pd.DataFrame(checkpoint.state.history), directory / HISTORY_NAME)
    logger.debug("Checkpoint saved", iteration=checkpoint.iteration, path=str(target))
    return target


def load_checkpoint(path: Union[str, Path]) -> Checkpoint:
    path = Path(path)
    if path.is_dir():
        path = path / CHECKPOINT_NAME
    try:
        with np.load(path) as data:
            arrays = {key: data[key] for key in data.files}
    except (OSError, ValueError) as exc:
        raise CheckpointError(f"cannot read checkpoint: {exc}", path=str(path)) from exc

    history_path = path.parent / HISTORY_NAME
    history = []
    if history_path.is_file() and history_path.stat().st_size > 1:
        try:
            history = pd.read_csv(history_path).to_dict("records")
        except pd.errors.EmptyDataError:
            history = []

    try:
        state = OptimizerState.from_arrays(
            {key[len(_OPT_PREFIX):]: value for key, value in arrays.items() if key.startswith(_OPT_PREFIX)},
            history,
        )
        cl0, area0, chord = (float(v) for v in arrays["spec"])
        lift, area_on = (bool(v) for v in arrays["spec_flags"])
        cd, cl, a = (float(v) for v in arrays["objective"])
    except KeyError as exc:
        raise CheckpointError(f"checkpoint is missing {exc}", path=str(path)) from exc

    return Checkpoint(
        state=state,
        U=arrays["U"],
        vertices=arrays["vertices"],
        spec=ObjectiveSpec(cl0=cl0, area0=area0, lift_constraint=lift, area_constraint=area_on, chord=chord),
        objective=ObjectiveValues(cd=cd, cl=cl, area=a, constraints=np.asarray(arrays["constraints"], dtype=float)),
        total_steps=int(arrays["total_steps"]),
    )


def latest_checkpoint(run_dir: Union[str, Path]) -> Path:
    run_dir = Path(run_dir)
    found = []
    if run_dir.is_dir():
        for child in run_dir.iterdir():
            match = ITERATION_DIR.match(child.name)
            if match and (child / CHECKPOINT_NAME).is_file():
                found.append((int(match.group(1)), child / CHECKPOINT_NAME))
    if not found:
        raise CheckpointError("no checkpoint found", path=str(run_dir))
    return max(found)[1]
