"""Tests for the linear solver, pseudo-time marching, forces and solution remapping."""

import numpy as np
import pytest
import scipy.sparse as sp

from aerodg.config import LinearSolverConfig, Preconditioner, Scheme, SolverConfig
from aerodg.exceptions import LinearSolverError, MeshTopologyError
from aerodg.solver import (
    Discretization,
    Freestream,
    ResidualOperator,
    SteadySolver,
    cfl_growth,
    compute_forces,
    conservative_from_primitive,
    freestream_state,
    linear_solve,
    remap_solution,
    rotate_forces,
    steady_solve,
)
from aerodg.solver.linear import block_jacobi
from aerodg.solver.steady import HISTORY_COLUMNS


@pytest.fixture
def system():
    A = sp.random(40, 40, density=0.1, random_state=7, format="csr") + 10.0 * sp.eye(40, format="csr")
    b = np.random.default_rng(3).normal(size=40)
    return A, b


class TestLinearSolve:
    """Preconditioned GMRES."""

    @pytest.mark.parametrize("kind", list(Preconditioner))
    def test_converges(self, system, kind):
        A, b = system
        x, info = linear_solve(A, b, LinearSolverConfig(preconditioner=kind), tol=1e-10, block=4)
        assert np.linalg.norm(A @ x - b) <= 1e-9 * np.linalg.norm(b)
        assert info.preconditioner == kind.value

    def test_transpose(self, system):
        A, b = system
        x, _ = linear_solve(A, b, tol=1e-10, block=4, transpose=True)
        assert np.linalg.norm(A.T @ x - b) <= 1e-9 * np.linalg.norm(b)

    def test_zero_rhs(self, system):
        A, _ = system
        x, info = linear_solve(A, np.zeros(40))
        np.testing.assert_array_equal(x, 0.0)
        assert info.iterations == 0

    def test_unreachable_tolerance(self, system):
        A, b = system
        config = LinearSolverConfig(preconditioner=Preconditioner.NONE, restart=1, maxiter=1)
        with pytest.raises(LinearSolverError) as info:
            linear_solve(A, b, config, tol=1e-14)
        assert info.value.exit_code == 3

    def test_singular_block(self):
        with pytest.raises(LinearSolverError):
            block_jacobi(sp.csr_matrix((8, 8)), 4)


class TestCflGrowth:
    @pytest.mark.parametrize("ratio,expected", [(0.5, 0.8), (1.5, 1.5), (10.0, 2.0), (np.inf, 2.0)])
    def test_clipped_ratio(self, ratio, expected):
        assert cfl_growth(ratio) == expected


class TestSteadySolver:
    """Backward-Euler continuation to a steady state."""

    @pytest.mark.parametrize("scheme", ["FV1", "DGp1"])
    def test_aligned_channel_is_already_steady(self, channel, fast_solver, scheme):
        config = fast_solver.model_copy(update={"scheme": Scheme(scheme)})
        result = steady_solve(None, channel, config, Freestream(mach=0.5, aoa=0.0))
        assert result.converged
        assert result.steps <= 2
        assert abs(result.cd) < 1e-12
        assert abs(result.cl) < 1e-12

    def test_airfoil_converges(self, naca_tiny, subsonic, fast_solver):
        result = steady_solve(None, naca_tiny, fast_solver, subsonic)
        history = result.history
        assert list(history.columns) == HISTORY_COLUMNS
        assert len(history) == result.steps + 1
        assert result.residual < 1e-3 * history["residual_l2"].iloc[0]
        assert result.cl > 0.0
        assert np.all(result.U[:, 0, 0] > 0.0)

    def test_step_cap_is_not_an_error(self, naca_tiny, subsonic, fast_solver):
        config = fast_solver.model_copy(update={"max_steps": 0})
        result = steady_solve(None, naca_tiny, config, subsonic)
        assert not result.converged
        assert result.steps == 0
        assert len(result.history) == 1

    def test_warm_start_from_converged_state(self, naca_tiny, subsonic, fast_solver):
        disc = Discretization(naca_tiny, fast_solver.scheme)
        solver = SteadySolver(ResidualOperator(disc, subsonic, fast_solver), fast_solver)
        first = solver.solve()
        assert first.converged
        again = solver.solve(first.U, cfl=first.cfl)
        assert again.steps <= 1
        assert again.cd == pytest.approx(first.cd, abs=1e-6)


class TestForces:
    def test_rotation(self):
        assert rotate_forces(1.0, 2.0, 0.0) == pytest.approx((1.0, 2.0))
        assert rotate_forces(1.0, 2.0, np.pi / 2) == pytest.approx((2.0, -1.0))

    def test_free_stream_loads_nothing(self, square_hole, subsonic):
        disc = Discretization(square_hole, Scheme.FV1)
        op = ResidualOperator(disc, subsonic)
        report = compute_forces(freestream_state(disc, subsonic), op)
        assert report.cd == pytest.approx(0.0, abs=1e-14)
        assert report.cl == pytest.approx(0.0, abs=1e-14)
        assert list(report.surface.columns) == ["x", "y", "Cp"]
        np.testing.assert_allclose(report.surface["Cp"], 0.0, atol=1e-13)

    def test_uniform_pressure_on_closed_body(self, square_hole, subsonic):
        disc = Discretization(square_hole, Scheme.DGP1)
        op = ResidualOperator(disc, subsonic)
        U = disc.zeros()
        U[:, 0, :] = conservative_from_primitive(1.0, 0.0, 0.0, 2.0, 1.4)
        report = compute_forces(U, op)
        assert abs(report.fx) < 1e-12
        assert abs(report.fy) < 1e-12
        assert len(report.surface) == len(disc.wall) * disc.faces.points.shape[1]


class TestRemap:
    """Conservative transfer between meshes of identical topology."""

    def test_zero_displacement(self, naca_tiny, subsonic, rng):
        disc = Discretization(naca_tiny, Scheme.DGP1)
        U = freestream_state(disc, subsonic) + 1e-3 * rng.normal(size=disc.shape)
        out = remap_solution(U, disc, Discretization(naca_tiny.with_vertices(naca_tiny.vertices), Scheme.DGP1))
        np.testing.assert_array_equal(out, U)
        assert out is not U

    @pytest.mark.parametrize("scheme", ["FV1", "DGp1", "DGp2"])
    def test_translation_keeps_uniform_flow(self, naca_tiny, subsonic, scheme):
        old = Discretization(naca_tiny, Scheme(scheme))
        new = Discretization(naca_tiny.with_vertices(naca_tiny.vertices + [0.3, -0.2]), Scheme(scheme))
        U = freestream_state(old, subsonic)
        np.testing.assert_allclose(remap_solution(U, old, new), U, atol=1e-12)

    @pytest.mark.parametrize("scheme", ["FV1", "DGp1"])
    def test_interior_motion_conserves_totals(self, jittered_triangles, subsonic, rng, scheme):
        mesh = jittered_triangles
        old = Discretization(mesh, Scheme(scheme))
        interior = np.setdiff1d(np.arange(mesh.n_vertices), mesh.boundary_vertices)
        vertices = np.array(mesh.vertices)
        vertices[interior] += 0.01 * rng.normal(size=(len(interior), 2))
        new = Discretization(mesh.with_vertices(vertices), Scheme(scheme))
        U = freestream_state(old, subsonic) + 1e-2 * rng.normal(size=old.shape) * np.array([1.0, 0.5, 0.5, 1.0])
        U_new = remap_solution(U, old, new)
        before = np.einsum("e,em->m", old.geometry.area, U[:, 0, :])
        after = np.einsum("e,em->m", new.geometry.area, U_new[:, 0, :])
        np.testing.assert_allclose(after, before, atol=1e-12)

    def test_topology_mismatch(self, unit_square, jittered_triangles):
        with pytest.raises(MeshTopologyError):
            remap_solution(
                np.zeros((16, 1, 4)),
                Discretization(unit_square, Scheme.FV1),
                Discretization(jittered_triangles, Scheme.FV1),
            )

    def test_scheme_mismatch(self, unit_square):
        with pytest.raises(MeshTopologyError):
            remap_solution(
                np.zeros((16, 1, 4)),
                Discretization(unit_square, Scheme.FV1),
                Discretization(unit_square, Scheme.DGP1),
            )
