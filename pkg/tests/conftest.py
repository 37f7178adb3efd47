"""Shared fixtures: small meshes, free streams and run-config files."""

from pathlib import Path
from typing import Any, Callable, Dict, Optional

import numpy as np
import pytest

from aerodg.config import SolverConfig
from aerodg.mesh import Mesh, PatchTag, builders, write_mesh
from aerodg.solver import Freestream


@pytest.fixture
def unit_square() -> Mesh:
    """4 x 4 quads on the unit square, far field all round."""
    return builders.rectangle(4, 4)


@pytest.fixture
def jittered_triangles() -> Mesh:
    return builders.rectangle(5, 4, (0.0, 0.0, 2.0, 1.0), triangles=True, jitter=0.3, seed=7)


@pytest.fixture
def channel() -> Mesh:
    """Straight channel with slip walls top and bottom."""
    return builders.rectangle(8, 2, (0.0, 0.0, 4.0, 1.0), tags={"bottom": PatchTag.WALL, "top": PatchTag.WALL})


@pytest.fixture
def square_hole() -> Mesh:
    return builders.square_hole(inner=0.5, outer=2.0, per_side=4, n_radial=4)


@pytest.fixture
def naca_tiny() -> Mesh:
    """32 x 8 O-mesh around NACA-0012; small enough for full pipeline tests."""
    return builders.naca_omesh("0012", n_around=32, n_radial=8, radius=10.0, first_spacing=5e-3)


@pytest.fixture
def subsonic() -> Freestream:
    return Freestream(mach=0.5, aoa=1.25, gamma=1.4)


@pytest.fixture
def fast_solver() -> SolverConfig:
    """Loose settings for tests that only need a converged-enough state."""
    return SolverConfig.model_validate({
        "scheme": "FV1",
        "tolerance": 1e-6,
        "max_steps": 80,
        "cfl": {"initial": 20.0},
        "av": {"c_eps": 0.0},
    })


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def write_config(tmp_path: Path) -> Callable[..., Path]:
    """Write a mesh next to a run-config file built from dotted ``entries``."""

    def _write(mesh: Mesh, entries: Optional[Dict[str, Any]] = None, name: str = "run.cfg") -> Path:
        mesh_path = write_mesh(mesh, tmp_path / "case.mesh")
        lines = [f"mesh = {mesh_path.name}", f"output_dir = {tmp_path / 'out'}"]
        for key, value in (entries or {}).items():
            if isinstance(value, (list, tuple)):
                value = " ".join(str(v) for v in value)
            elif isinstance(value, bool):
                value = str(value).lower()
            lines.append(f"{key} = {value}")
        path = tmp_path / name
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    return _write


@pytest.fixture
def fast_entries() -> Dict[str, Any]:
    """Run-config entries for a quick FV1 subsonic case."""
    return {
        "scheme": "FV1",
        "freestream.mach": 0.5,
        "solver.tolerance": 1e-6,
        "solver.max_steps": 80,
        "solver.cfl.initial": 20.0,
        "solver.av.c_eps": 0.0,
    }
