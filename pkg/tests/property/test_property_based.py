"""Property-based tests for the numerical kernels using Hypothesis."""

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from aerodg.config import parse_config_text
from aerodg.objectives import loop_area
from aerodg.optimizer import BfgsState, bfgs_update, update_penalty
from aerodg.parameterization.bernstein import bernstein_all, bernstein_derivative_all
from aerodg.solver import conservative_from_primitive, hllc_flux, llf_flux, primitive_from_conservative
from aerodg.solver.gas import normal_flux
from aerodg.solver.steady import cfl_growth

GAMMA = 1.4

densities = st.floats(0.05, 20.0)
velocities = st.floats(-3.0, 3.0)
pressures = st.floats(0.05, 20.0)
angles = st.floats(0.0, 2.0 * np.pi)


@st.composite
def gas_states(draw):
    return conservative_from_primitive(draw(densities), draw(velocities), draw(velocities), draw(pressures), GAMMA)


def unit(theta):
    return np.array([np.cos(theta), np.sin(theta)])


@given(u=gas_states())
def test_primitive_round_trip(u):
    rho, v1, v2, p = primitive_from_conservative(u, GAMMA)
    np.testing.assert_allclose(conservative_from_primitive(rho, v1, v2, p, GAMMA), u, rtol=1e-12, atol=1e-12)


@given(u=gas_states(), theta=angles)
def test_fluxes_are_consistent(u, theta):
    n = unit(theta)
    exact = normal_flux(u, n, GAMMA)
    scale = 1.0 + np.abs(exact).max()
    np.testing.assert_allclose(llf_flux(u, u, n, GAMMA), exact, atol=1e-12 * scale)
    np.testing.assert_allclose(hllc_flux(u, u, n, GAMMA), exact, atol=1e-12 * scale)


@given(ul=gas_states(), ur=gas_states(), theta=angles)
def test_fluxes_are_conservative(ul, ur, theta):
    n = unit(theta)
    for fn in (llf_flux, hllc_flux):
        forward = fn(ul, ur, n, GAMMA)
        backward = fn(ur, ul, -n, GAMMA)
        np.testing.assert_allclose(forward, -backward, atol=1e-10 * (1.0 + np.abs(forward).max()))


@given(degree=st.integers(0, 8), u=st.lists(st.floats(0.0, 1.0), min_size=1, max_size=10))
def test_bernstein_partition_of_unity(degree, u):
    values = bernstein_all(degree, np.array(u))
    assert np.all(values >= 0.0)
    np.testing.assert_allclose(values.sum(axis=1), 1.0, rtol=1e-12)
    np.testing.assert_allclose(bernstein_derivative_all(degree, np.array(u)).sum(axis=1), 0.0, atol=1e-9)


@given(ratio=st.floats(allow_nan=False), lo=st.floats(0.1, 1.0), hi=st.floats(1.0, 10.0))
def test_cfl_growth_stays_in_limits(ratio, lo, hi):
    assert lo <= cfl_growth(ratio, lo, hi) <= hi


@given(rho=st.floats(0.0, 1e6), mult=st.floats(0.0, 1e6), margin=st.floats(1.0, 3.0))
def test_penalty_never_decreases(rho, mult, margin):
    updated = update_penalty(rho, mult, margin)
    assert updated >= rho
    assert updated >= margin * mult


@settings(max_examples=50)
@given(
    s=st.lists(st.floats(-10.0, 10.0), min_size=3, max_size=3),
    y=st.lists(st.floats(-10.0, 10.0), min_size=3, max_size=3),
)
def test_damped_bfgs_stays_positive_definite(s, y):
    s, y = np.array(s), np.array(y)
    assume(np.linalg.norm(s) > 0.5)
    updated = bfgs_update(BfgsState.initial(3), s, y)
    assert np.linalg.eigvalsh(updated.B).min() > 0.0
    np.testing.assert_allclose(updated.B, updated.B.T)


@given(n=st.integers(3, 40), radius=st.floats(0.1, 10.0), cx=st.floats(-5.0, 5.0), cy=st.floats(-5.0, 5.0))
def test_polygon_area(n, radius, cx, cy):
    theta = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    pts = np.stack([cx + radius * np.cos(theta), cy + radius * np.sin(theta)], axis=-1)
    expected = 0.5 * n * radius**2 * np.sin(2.0 * np.pi / n)
    np.testing.assert_allclose(loop_area(pts), expected, rtol=1e-9)
    np.testing.assert_allclose(loop_area(pts[::-1]), -expected, rtol=1e-9)


keys = st.text(alphabet="abcdefgh_", min_size=1, max_size=6)


@given(entries=st.dictionaries(st.tuples(keys, keys), st.integers(-1000, 1000), min_size=1, max_size=8))
def test_dotted_keys_nest(entries):
    text = "\n".join(f"{a}.{b} = {v}" for (a, b), v in entries.items())
    tree = parse_config_text(text)
    for (a, b), v in entries.items():
        assert tree[a][b] == v
