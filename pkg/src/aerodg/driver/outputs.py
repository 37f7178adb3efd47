"""CSV and field files written by the driver; one header row, 17 significant digits."""

from pathlib import Path
from typing import Dict, List, Union

import numpy as np
import pandas as pd
import structlog

from ..mesh import Mesh, wall_loops
from ..solver import Discretization, SteadyResult

logger = structlog.get_logger(__name__)

FLOAT_FORMAT = "%.17g"
VARIABLES = ("rho", "rhou", "rhov", "rhoE")
CONVERGENCE_COLUMNS = {"step": "step", "cfl": "CFL", "residual_l2": "residual_L2", "cl": "Cl", "cd": "Cd"}
OPT_HISTORY_COLUMNS = ["iter", "Cd", "Cl", "A", "feasibility", "kkt_norm"]

PathLike = Union[str, Path]


def write_table(frame: pd.DataFrame, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def field_frame(U: np.ndarray, disc: Discretization) -> pd.DataFrame:
    """Per-element cell averages, followed by the modal coefficients for DG."""
    centroid = disc.mesh.geometry.centroid
    averages = disc.cell_averages(U)
    columns: Dict[str, np.ndarray] = {
        "element": np.arange(disc.n_elements),
        "x": centroid[:, 0],
        "y": centroid[:, 1],
    }
    for m, name in enumerate(VARIABLES):
        columns[name] = averages[:, m]
    if disc.scheme.is_dg:
        for k in range(U.shape[1]):
            for m, name in enumerate(VARIABLES):
                columns[f"{name}_{k}"] = U[:, k, m]
    return pd.DataFrame(columns)


def write_fields(U: np.ndarray, disc: Discretization, path: PathLike) -> Path:
    return write_table(field_frame(U, disc), path)


def convergence_frame(history: pd.DataFrame) -> pd.DataFrame:
    return history.rename(columns=CONVERGENCE_COLUMNS)[list(CONVERGENCE_COLUMNS.values())]


def write_solution(result: SteadyResult, disc: Discretization, directory: PathLike) -> List[Path]:
    """Fields, wall Cp, convergence history and integrated coefficients of one solve."""
    directory = Path(directory)
    forces = pd.DataFrame([{"Cd": result.cd, "Cl": result.cl, "converged": result.converged, "steps": result.steps}])
    written = [
        write_fields(result.U, disc, directory / "fields.csv"),
        write_table(result.forces.surface, directory / "surface_cp.csv"),
        write_table(convergence_frame(result.history), directory / "convergence.csv"),
        write_table(forces, directory / "forces.csv"),
    ]
    logger.info("Solution written", directory=str(directory), files=[p.name for p in written])
    return written


def wall_frame(mesh: Mesh) -> pd.DataFrame:
    frames = []
    for loop_id, loop in enumerate(wall_loops(mesh)):
        pts = mesh.vertices[loop]
        frames.append(pd.DataFrame({"loop": loop_id, "vertex": loop, "x": pts[:, 0], "y": pts[:, 1]}))
    if not frames:
        return pd.DataFrame(columns=["loop", "vertex", "x", "y"])
    return pd.concat(frames, ignore_index=True)


def history_frame(rows: List[Dict[str, object]]) -> pd.DataFrame:
    """Optimizer history with the objective columns first."""
    frame = pd.DataFrame(rows)
    if frame.empty:
        return pd.DataFrame(columns=OPT_HISTORY_COLUMNS)
    extra = [c for c in frame.columns if c not in OPT_HISTORY_COLUMNS and c != "objective"]
    return frame[[c for c in OPT_HISTORY_COLUMNS if c in frame.columns] + extra]


def comparison_frame(before: Dict[str, float], after: Dict[str, float]) -> pd.DataFrame:
    rows = []
    for key, start in before.items():
        end = after[key]
        delta = end - start
        rows.append({
            "quantity": key,
            "initial": start,
            "final": end,
            "delta": delta,
            "delta_percent": 100.0 * delta / start if start != 0.0 else 0.0,
        })
    return pd.DataFrame(rows, columns=["quantity", "initial", "final", "delta", "delta_percent"])
