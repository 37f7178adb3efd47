"""Performance benchmarks for the solver, deformation and optimizer kernels."""

import numpy as np
import pytest

from aerodg.config import SolverConfig
from aerodg.deformation import MeshMorpher
from aerodg.mesh import builders
from aerodg.optimizer import qp_solve
from aerodg.solver import Discretization, Freestream, JacobianAssembler, ResidualOperator, freestream_state

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def airfoil():
    return builders.naca_omesh("0012", n_around=64, n_radial=16, radius=10.0, first_spacing=2e-3)


@pytest.fixture(scope="module")
def freestream():
    return Freestream(mach=0.5, aoa=1.25)


def operator(mesh, scheme, fs):
    config = SolverConfig.model_validate({"scheme": scheme})
    return ResidualOperator(Discretization(mesh, config.scheme, config.quadrature), fs, config)


@pytest.mark.parametrize("scheme", ["FV1", "FV2", "DGp1", "DGp2"])
def test_residual_evaluation(benchmark, airfoil, freestream, scheme):
    op = operator(airfoil, scheme, freestream)
    U = freestream_state(op.disc, freestream)
    R = benchmark(op, U)
    assert R.shape == U.shape


@pytest.mark.parametrize("scheme", ["FV1", "DGp1"])
def test_jacobian_assembly(benchmark, airfoil, freestream, scheme):
    op = operator(airfoil, scheme, freestream)
    U = freestream_state(op.disc, freestream)
    assembler = JacobianAssembler(op)
    J = benchmark(assembler.assemble, U)
    assert J.shape == (U.size, U.size)


def test_mesh_deformation(benchmark, airfoil):
    morpher = MeshMorpher(airfoil)
    wall = airfoil.vertices[morpher.wall]
    move = np.stack([np.zeros(len(wall)), 1e-3 * np.sin(np.pi * wall[:, 0])], axis=-1)
    mesh = benchmark(morpher.deform, move)
    assert mesh.n_vertices == airfoil.n_vertices


def test_qp_subproblem(benchmark):
    rng = np.random.default_rng(0)
    n = 40
    M = rng.normal(size=(n, n))
    B = M @ M.T + n * np.eye(n)
    g = rng.normal(size=n)
    A_in = rng.normal(size=(2, n))
    result = benchmark(qp_solve, g, B, None, None, A_in, -np.ones(2), -0.1 * np.ones(n), 0.1 * np.ones(n))
    assert not result.relaxed
