"""Tests for Bernstein polynomials, FFD lattices and Hicks-Henne bumps."""

import numpy as np
import pytest

from aerodg.config import FfdConfig, HicksHenneConfig, ParameterizationConfig
from aerodg.exceptions import EmbeddingError, ParameterizationError
from aerodg.parameterization import (
    DesignVector,
    FfdBox,
    FfdParameterization,
    HicksHenneParam,
    bernstein,
    bernstein_all,
    bernstein_derivative_all,
    build_parameterization,
    bump_peaks,
    ffd_deform,
    ffd_embed,
    hh_basis,
    hh_deform,
)


class TestBernstein:
    """Scalar and vectorized polynomials."""

    def test_known_values(self):
        assert bernstein(1, 2, 0.5) == pytest.approx(0.5)
        assert bernstein(0, 3, 0.0) == 1.0
        assert bernstein(3, 3, 1.0) == 1.0

    def test_vectorized_matches_scalar(self):
        u = np.linspace(0.0, 1.0, 7)
        table = bernstein_all(4, u)
        for n, ui in enumerate(u):
            for i in range(5):
                assert table[n, i] == pytest.approx(bernstein(i, 4, ui))

    def test_derivative_matches_difference(self):
        u = np.array([0.2, 0.5, 0.9])
        h = 1e-6
        fd = (bernstein_all(3, u + h) - bernstein_all(3, u - h)) / (2 * h)
        np.testing.assert_allclose(bernstein_derivative_all(3, u), fd, atol=1e-8)

    @pytest.mark.parametrize("i,l,u", [(3, 2, 0.5), (-1, 2, 0.5), (0, 2, 1.5)])
    def test_out_of_range(self, i, l, u):
        with pytest.raises(ValueError):
            bernstein(i, l, u)


class TestFfdBox:
    """Lattice evaluation and local-coordinate inversion."""

    def test_undeformed_lattice_is_affine(self):
        box = FfdBox((0.0, -1.0, 2.0, 1.0), (4, 3))
        uv = np.array([[0.0, 0.0], [0.25, 0.5], [1.0, 1.0]])
        np.testing.assert_allclose(box.evaluate(uv), [[0.0, -1.0], [0.5, 0.0], [2.0, 1.0]], atol=1e-14)

    def test_embedding_inverts_a_curved_lattice(self, rng):
        box = FfdBox((0.0, 0.0, 1.0, 1.0), (3, 3))
        box.P[1, 1] += [0.1, -0.08]
        uv_true = rng.uniform(0.05, 0.95, size=(20, 2))
        uv = ffd_embed(box, box.evaluate(uv_true))
        np.testing.assert_allclose(uv, uv_true, atol=1e-9)

    def test_point_outside_box(self):
        box = FfdBox((0.0, 0.0, 1.0, 1.0), (2, 2))
        with pytest.raises(EmbeddingError) as info:
            ffd_embed(box, np.array([[0.5, 0.5], [1.5, 0.5]]))
        assert info.value.details["points"] == [1]

    def test_uniform_translation(self):
        box = FfdBox((0.0, 0.0, 1.0, 1.0), (3, 2))
        uv = np.array([[0.3, 0.7], [0.9, 0.1]])
        moved = ffd_deform(box, uv, np.tile([0.0, 0.02], (box.n_control, 1)))
        np.testing.assert_allclose(moved, [[0.0, 0.02], [0.0, 0.02]])

    def test_wrong_control_count(self):
        box = FfdBox((0.0, 0.0, 1.0, 1.0), (2, 2))
        with pytest.raises(ParameterizationError):
            box.deform(np.array([[0.5, 0.5]]), np.zeros((3, 2)))

    def test_invalid_box(self):
        with pytest.raises(ParameterizationError):
            FfdBox((1.0, 0.0, 0.0, 1.0), (2, 2))


class TestFfdParameterization:
    """Design variables on the airfoil wall."""

    @pytest.fixture
    def ffd(self, naca_tiny):
        return FfdParameterization(naca_tiny, FfdConfig())

    def test_whole_airfoil_is_embedded(self, ffd, naca_tiny):
        assert len(ffd.embedded) == len(naca_tiny.wall_vertices)
        assert ffd.n_design == 8
        assert len(ffd.names()) == 8

    def test_bounds_follow_lattice_spacing(self, ffd):
        lower, upper = ffd.bounds()
        np.testing.assert_allclose(upper, 0.25 * 0.2)
        np.testing.assert_allclose(lower, -upper)
        np.testing.assert_allclose(ffd.step_scales(), 0.2)

    def test_zero_design_is_identity(self, ffd):
        np.testing.assert_array_equal(ffd.displacement(np.zeros(8)), 0.0)

    def test_displacement_is_linear(self, ffd, rng):
        a, b = rng.normal(size=8), rng.normal(size=8)
        np.testing.assert_allclose(ffd.displacement(a + 2 * b), ffd.displacement(a) + 2 * ffd.displacement(b), atol=1e-12)

    def test_equal_moves_translate_the_wall(self, ffd):
        disp = ffd.displacement(np.full(8, 0.01))
        np.testing.assert_allclose(disp[:, 1], 0.01, atol=1e-12)
        np.testing.assert_array_equal(disp[:, 0], 0.0)

    def test_x_components(self, naca_tiny):
        ffd = FfdParameterization(naca_tiny, FfdConfig(active_x=True))
        assert ffd.n_design == 16
        delta = np.zeros(16)
        delta[8:] = 0.01
        np.testing.assert_allclose(ffd.displacement(delta)[:, 0], 0.01, atol=1e-12)
        np.testing.assert_allclose(ffd.control_displacements(delta)[:, 0], 0.01)

    def test_box_missing_the_wall(self, naca_tiny):
        with pytest.raises(ParameterizationError):
            FfdParameterization(naca_tiny, FfdConfig(box=(3.0, 3.0, 4.0, 4.0)))

    def test_wrong_length(self, ffd):
        with pytest.raises(ParameterizationError):
            ffd.displacement(np.zeros(5))


class TestHicksHenne:
    """Bump functions on upper and lower surfaces."""

    @pytest.fixture
    def hh(self, naca_tiny):
        return HicksHenneParam(naca_tiny, HicksHenneConfig(n_bumps=4))

    def test_peaks_are_cosine_spaced(self):
        np.testing.assert_allclose(bump_peaks(1), [0.5])
        peaks = bump_peaks(5)
        assert np.all(np.diff(peaks) > 0.0)
        np.testing.assert_allclose(peaks + peaks[::-1], 1.0)

    def test_bump_peaks_at_one(self, hh):
        for i, p in enumerate(hh.peaks):
            assert hh_basis(p, i, hh) == pytest.approx(1.0)
            assert hh_basis(0.0, i, hh) == pytest.approx(0.0, abs=1e-14)

    def test_upper_amplitude_moves_upper_side_only(self, hh):
        delta = np.zeros(hh.n_design)
        delta[1] = 0.003
        disp = hh_deform(hh, delta)
        assert np.all(disp[~hh.upper] == 0.0)
        assert disp[hh.upper, 1].max() > 0.0
        np.testing.assert_array_equal(disp[:, 0], 0.0)

    def test_bounds(self, hh):
        lower, upper = hh.bounds()
        np.testing.assert_allclose(upper, 0.005)
        assert len(hh.names()) == 8

    def test_open_wall_rejected(self, channel):
        with pytest.raises(ParameterizationError):
            HicksHenneParam(channel, HicksHenneConfig())


class TestDesignVector:
    """Bounds bookkeeping."""

    def test_defaults_and_clipping(self):
        D = DesignVector(np.array([0.5, -2.0]), np.array([-1.0, -1.0]), np.array([1.0, 1.0]))
        assert D.names == ["d0", "d1"]
        assert not D.within_bounds()
        np.testing.assert_array_equal(D.clipped().values, [0.5, -1.0])

    def test_shape_mismatch(self):
        with pytest.raises(ParameterizationError):
            DesignVector(np.zeros(2), np.zeros(3), np.ones(2))

    def test_with_values_copies(self):
        D = DesignVector(np.zeros(2), -np.ones(2), np.ones(2))
        E = D.with_values(np.array([0.1, 0.2]))
        assert D.values[0] == 0.0
        assert E.within_bounds()


class TestFactory:
    def test_dispatch(self, naca_tiny):
        assert isinstance(build_parameterization(naca_tiny, ParameterizationConfig()), FfdParameterization)
        config = ParameterizationConfig(kind="hicks_henne")
        assert isinstance(build_parameterization(naca_tiny, config), HicksHenneParam)
