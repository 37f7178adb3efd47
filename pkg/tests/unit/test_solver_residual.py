"""Tests for the spatial residual, its Jacobian, artificial viscosity and the limiters."""

import numpy as np
import pytest

from aerodg.config import ArtificialViscosityConfig, AvVariant, Scheme, SolverConfig
from aerodg.exceptions import PositivityError
from aerodg.solver import (
    Discretization,
    Freestream,
    ResidualOperator,
    assemble_jacobian,
    av_coefficients,
    freestream_state,
    modal_decay_gate,
    positivity_limit,
    reconstruct_fv2,
    residual,
)
from aerodg.solver.gas import pressure

SCHEMES = ["FV1", "FV2", "DGp1", "DGp2"]


def make_operator(mesh, scheme, fs, **solver):
    config = SolverConfig.model_validate({"scheme": scheme, **solver})
    disc = Discretization(mesh, config.scheme, config.quadrature)
    return ResidualOperator(disc, fs, config)


def perturbed(op, rng, scale=1e-2):
    U = freestream_state(op.disc, op.freestream)
    return U + scale * rng.normal(size=U.shape) * np.array([1.0, 0.5, 0.5, 1.0])


class TestFreestreamPreservation:
    """A uniform free stream is an exact steady state where walls are aligned with it."""

    @pytest.mark.parametrize("scheme", SCHEMES)
    def test_far_field_box(self, jittered_triangles, subsonic, scheme):
        op = make_operator(jittered_triangles, scheme, subsonic)
        R = op(freestream_state(op.disc, subsonic))
        assert np.abs(R).max() < 1e-12

    @pytest.mark.parametrize("scheme", SCHEMES)
    def test_aligned_channel(self, channel, scheme):
        fs = Freestream(mach=0.5, aoa=0.0)
        op = make_operator(channel, scheme, fs)
        assert np.abs(op(freestream_state(op.disc, fs))).max() < 1e-12

    def test_inclined_wall_sees_the_flow(self, channel, subsonic):
        op = make_operator(channel, "FV1", subsonic)
        assert np.abs(op(freestream_state(op.disc, subsonic))).max() > 1e-6

    def test_one_shot_residual(self, jittered_triangles, subsonic, rng):
        config = SolverConfig(scheme=Scheme.DGP1)
        op = make_operator(jittered_triangles, "DGp1", subsonic)
        U = perturbed(op, rng)
        np.testing.assert_array_equal(residual(U, jittered_triangles, config, subsonic), op(U))


class TestJacobian:
    """Colored finite-difference Jacobian against directional differences."""

    @pytest.mark.parametrize("scheme", ["FV1", "FV2", "DGp1"])
    def test_directional_derivative(self, jittered_triangles, subsonic, rng, scheme):
        op = make_operator(jittered_triangles, scheme, subsonic, av={"c_eps": 0.0})
        U = perturbed(op, rng)
        frozen = op.freeze(U)
        J = assemble_jacobian(U, op)
        v = rng.normal(size=U.shape)
        h = 1e-6
        fd = (op(U + h * v, frozen) - op(U - h * v, frozen)) / (2 * h)
        Jv = J @ v.ravel()
        assert np.linalg.norm(Jv - fd.ravel()) <= 1e-5 * np.linalg.norm(fd)

    def test_block_sparsity(self, unit_square, subsonic, rng):
        op = make_operator(unit_square, "DGp1", subsonic, av={"c_eps": 0.0})
        J = assemble_jacobian(perturbed(op, rng), op)
        assert J.shape == (op.disc.n_dofs, op.disc.n_dofs)
        # interior quads couple with at most four neighbours
        assert J.nnz <= unit_square.n_elements * 5 * op.disc.block_size**2


class TestArtificialViscosity:
    @pytest.fixture
    def dg(self, jittered_triangles, subsonic):
        return make_operator(jittered_triangles, "DGp1", subsonic)

    def test_zero_for_finite_volumes(self, jittered_triangles, subsonic, rng):
        op = make_operator(jittered_triangles, "FV1", subsonic)
        np.testing.assert_array_equal(op.coefficients(perturbed(op, rng)), 0.0)

    def test_zero_for_uniform_flow(self, dg, subsonic):
        np.testing.assert_allclose(dg.coefficients(freestream_state(dg.disc, subsonic)), 0.0, atol=1e-14)

    @pytest.mark.parametrize("variant", ["volume", "face"])
    def test_positive_where_flow_varies(self, jittered_triangles, subsonic, rng, variant):
        op = make_operator(jittered_triangles, "DGp1", subsonic, av={"variant": variant, "c_eps": 0.05})
        eps = op.coefficients(perturbed(op, rng))
        assert np.all(eps >= 0.0)
        assert eps.max() > 0.0

    def test_face_variant_needs_fluxes(self, dg, rng):
        config = ArtificialViscosityConfig(variant=AvVariant.FACE)
        with pytest.raises(ValueError):
            av_coefficients(dg.disc, perturbed(dg, rng), config, 1.4)

    def test_off_switch(self, jittered_triangles, subsonic, rng):
        op = make_operator(jittered_triangles, "DGp2", subsonic, av={"c_eps": 0.0})
        np.testing.assert_array_equal(op.coefficients(perturbed(op, rng)), 0.0)

    def test_modal_decay_gate_range(self, dg, rng):
        gate = modal_decay_gate(dg.disc, perturbed(dg, rng, scale=0.1))
        assert np.all((gate >= 0.0) & (gate <= 1.0))


class TestPositivityLimiter:
    """Scaling of high-order modes toward the cell average."""

    def test_finite_volume_untouched(self, unit_square, subsonic):
        disc = Discretization(unit_square, Scheme.FV1)
        U = freestream_state(disc, subsonic)
        limited, theta = positivity_limit(U, disc)
        assert limited is U
        np.testing.assert_array_equal(theta, 1.0)

    def test_restores_positivity(self, unit_square, subsonic):
        disc = Discretization(unit_square, Scheme.DGP1)
        U = freestream_state(disc, subsonic)
        U[:, 1, 0] = 3.0
        U[:, 2, 3] = -4.0
        limited, theta = positivity_limit(U, disc)
        states = np.einsum("epk,ekm->epm", disc.phi_check, limited)
        assert states[..., 0].min() > 0.0
        assert pressure(states, 1.4).min() > 0.0
        np.testing.assert_array_equal(limited[:, 0, :], U[:, 0, :])
        assert np.all(theta < 1.0)

    def test_smooth_state_untouched(self, unit_square, subsonic):
        disc = Discretization(unit_square, Scheme.DGP1)
        U = freestream_state(disc, subsonic)
        U[:, 1, 0] = 1e-3
        limited, theta = positivity_limit(U, disc)
        np.testing.assert_array_equal(limited, U)
        np.testing.assert_array_equal(theta, 1.0)

    def test_negative_average(self, unit_square, subsonic):
        disc = Discretization(unit_square, Scheme.DGP1)
        U = freestream_state(disc, subsonic)
        U[3, 0, 0] = -0.1
        with pytest.raises(PositivityError) as info:
            positivity_limit(U, disc)
        assert info.value.details["elements"] == [3]


class TestSlopeLimiter:
    def test_reconstructed_values_stay_within_neighbours(self, jittered_triangles, subsonic, rng):
        op = make_operator(jittered_triangles, "FV2", subsonic)
        ubar = perturbed(op, rng, scale=0.05)[:, 0, :]
        recon = op.recon
        grads = recon.gradients(ubar)
        phi = recon.limiter_factors(ubar, grads)
        assert np.all((phi >= 0.0) & (phi <= 1.0))
        umax, umin = recon._bounds(ubar)
        mesh = jittered_triangles
        faces = op.disc.interior
        states = recon.face_states(ubar, grads, phi, mesh.face_left[faces], op.disc.faces.points[faces])
        left = mesh.face_left[faces]
        assert np.all(states <= umax[left][:, None, :] + 1e-12)
        assert np.all(states >= umin[left][:, None, :] - 1e-12)

    def test_functional_form(self, jittered_triangles, subsonic, rng):
        op = make_operator(jittered_triangles, "FV2", subsonic)
        ubar = perturbed(op, rng)[:, 0, :]
        grads = reconstruct_fv2(ubar, op.disc, op.farfield_ghost.mean(axis=1))
        phi = op.slopes(perturbed(op, rng))
        assert grads.shape == (jittered_triangles.n_elements, 4, 2)
        assert phi.shape == (jittered_triangles.n_elements, 4)
