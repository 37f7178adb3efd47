"""Tests for the gas model, numerical fluxes, Taylor basis and quadrature."""

import numpy as np
import pytest

from aerodg.config import Scheme
from aerodg.exceptions import ConfigError, PositivityError
from aerodg.mesh import element_geometry
from aerodg.solver import (
    Discretization,
    Freestream,
    conservative_from_primitive,
    euler_flux,
    hllc_flux,
    llf_flux,
    pressure,
    primitive_from_conservative,
    project,
    riemann_flux,
    taylor_basis_eval,
)
from aerodg.solver.gas import flux, flux_jacobians, max_wave_speed, mirror_matrix, mirror_state, normal_flux


@pytest.fixture
def states(rng):
    rho = rng.uniform(0.5, 2.0, size=12)
    v1, v2 = rng.uniform(-0.6, 0.6, size=(2, 12))
    p = rng.uniform(0.3, 1.5, size=12)
    return conservative_from_primitive(rho, v1, v2, p, 1.4)


@pytest.fixture
def normals(rng):
    theta = rng.uniform(0.0, 2.0 * np.pi, size=12)
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


class TestFreestream:
    def test_nondimensional_state(self):
        fs = Freestream(mach=0.8, aoa=0.0)
        rho, v1, v2, p = primitive_from_conservative(fs.state)
        assert rho == pytest.approx(1.0)
        assert p == pytest.approx(1.0 / 1.4)
        assert v1 == pytest.approx(0.8)
        assert v2 == pytest.approx(0.0)
        # unit sound speed
        assert max_wave_speed(fs.state, 1.4) == pytest.approx(1.8)

    def test_angle_of_attack_rotates_velocity(self):
        fs = Freestream(mach=0.5, aoa=90.0)
        np.testing.assert_allclose(fs.velocity, [0.0, 0.5], atol=1e-15)

    @pytest.mark.parametrize("kwargs", [{"mach": 0.0}, {"gamma": 1.0}])
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigError):
            Freestream(**kwargs)


class TestGas:
    """Conservative/primitive relations and the flux tensor."""

    def test_primitive_round_trip(self, states):
        rho, v1, v2, p = primitive_from_conservative(states)
        np.testing.assert_allclose(conservative_from_primitive(rho, v1, v2, p, 1.4), states, rtol=1e-14)

    @pytest.mark.parametrize("column,value", [(0, -1.0), (3, 0.0)])
    def test_non_physical_state(self, states, column, value):
        bad = states.copy()
        bad[3, column] = value
        with pytest.raises(PositivityError):
            primitive_from_conservative(bad)
        with pytest.raises(PositivityError):
            euler_flux(bad)

    def test_flux_of_fluid_at_rest(self):
        u = conservative_from_primitive(1.0, 0.0, 0.0, 2.0, 1.4)
        F = euler_flux(u)
        np.testing.assert_allclose(F[:, 0], [0.0, 2.0, 0.0, 0.0])
        np.testing.assert_allclose(F[:, 1], [0.0, 0.0, 2.0, 0.0])

    def test_flux_jacobians_match_differences(self, states):
        A = flux_jacobians(states, 1.4)
        h = 1e-7
        for m in range(4):
            e = np.zeros(4)
            e[m] = h
            fd = (flux(states + e, 1.4) - flux(states - e, 1.4)) / (2 * h)
            np.testing.assert_allclose(A[:, 0, :, m], fd[..., 0], atol=1e-6)
            np.testing.assert_allclose(A[:, 1, :, m], fd[..., 1], atol=1e-6)

    def test_mirror(self, states, normals):
        ghost = mirror_state(states, normals)
        vn = np.sum(states[:, 1:3] * normals, axis=-1)
        np.testing.assert_allclose(np.sum(ghost[:, 1:3] * normals, axis=-1), -vn, atol=1e-14)
        np.testing.assert_allclose(pressure(ghost, 1.4), pressure(states, 1.4), rtol=1e-13)
        np.testing.assert_allclose(np.einsum("nij,nj->ni", mirror_matrix(normals), states), ghost, atol=1e-14)


class TestRiemann:
    """Consistency and conservation of the face fluxes."""

    @pytest.mark.parametrize("solver", [llf_flux, hllc_flux])
    def test_consistency(self, solver, states, normals):
        np.testing.assert_allclose(solver(states, states, normals, 1.4), normal_flux(states, normals, 1.4), atol=1e-12)

    @pytest.mark.parametrize("solver", [llf_flux, hllc_flux])
    def test_conservation(self, solver, states, normals):
        left, right = states, states[::-1]
        np.testing.assert_allclose(solver(left, right, normals, 1.4), -solver(right, left, -normals, 1.4), atol=1e-12)

    def test_llf_dissipates_jump(self):
        n = np.array([1.0, 0.0])
        ul = conservative_from_primitive(1.0, 0.0, 0.0, 1.0, 1.4)
        ur = conservative_from_primitive(0.5, 0.0, 0.0, 1.0, 1.4)
        # mass flows from the denser side
        assert llf_flux(ul, ur, n, 1.4)[0] > 0.0

    def test_checked_entry_point(self, states, normals):
        bad = states.copy()
        bad[0, 0] = -1.0
        with pytest.raises(PositivityError):
            riemann_flux(bad, states, normals)
        np.testing.assert_allclose(riemann_flux(states, states, normals, solver="hllc"), normal_flux(states, normals, 1.4), atol=1e-12)


class TestBasis:
    """Element-local Taylor basis."""

    @pytest.mark.parametrize("scheme,nk", [("FV1", 1), ("FV2", 1), ("DGp1", 3), ("DGp2", 6)])
    def test_state_shape(self, jittered_triangles, scheme, nk):
        disc = Discretization(jittered_triangles, Scheme(scheme))
        assert disc.shape == (jittered_triangles.n_elements, nk, 4)
        assert disc.n_dofs == jittered_triangles.n_elements * nk * 4

    @pytest.mark.parametrize("scheme", ["DGp1", "DGp2"])
    def test_higher_modes_have_zero_mean(self, jittered_triangles, scheme):
        disc = Discretization(jittered_triangles, Scheme(scheme))
        np.testing.assert_allclose(disc.mass[:, 0, 0], jittered_triangles.geometry.area, rtol=1e-13)
        np.testing.assert_allclose(disc.mass[:, 0, 1:], 0.0, atol=1e-14)

    def test_single_function_at_centroid(self, unit_square):
        geom = element_geometry(unit_square, 5)
        value, grad = taylor_basis_eval(geom, geom.centroid, 0, 1)
        assert value == 1.0
        np.testing.assert_array_equal(grad, [0.0, 0.0])
        value, grad = taylor_basis_eval(geom, geom.centroid, 1, 1)
        assert value == pytest.approx(0.0, abs=1e-14)
        np.testing.assert_allclose(grad, [1.0 / geom.dx, 0.0])

    def test_index_out_of_range(self, unit_square):
        with pytest.raises(IndexError):
            taylor_basis_eval(element_geometry(unit_square, 0), np.zeros(2), 3, 1)

    def test_projection_reproduces_linear_fields(self, jittered_triangles):
        disc = Discretization(jittered_triangles, Scheme.DGP1)

        def field(x):
            return np.stack(
                [1.0 + 0.1 * x[..., 0], 0.2 * x[..., 1], np.zeros_like(x[..., 0]), 3.0 - 0.05 * x[..., 1]], axis=-1
            )

        U = project(field, disc)
        np.testing.assert_allclose(disc.volume_values(U), field(disc.volume.points), atol=1e-12)


class TestQuadrature:
    @pytest.mark.parametrize("scheme", ["FV1", "DGp2"])
    def test_weights_sum_to_measures(self, naca_tiny, scheme):
        disc = Discretization(naca_tiny, Scheme(scheme))
        np.testing.assert_allclose(disc.volume.weights.sum(axis=1), naca_tiny.geometry.area, rtol=1e-12)
        np.testing.assert_allclose(disc.faces.weights.sum(axis=1), naca_tiny.geometry.face_length, rtol=1e-13)
