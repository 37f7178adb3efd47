"""Tests for the QP subproblem, damped BFGS, merit line search and the SLSQP loop."""

import numpy as np
import pytest

from aerodg.config import OptimizerConfig
from aerodg.exceptions import AeroDGError, OptimizerError
from aerodg.optimizer import (
    BfgsState,
    OptimizationProblem,
    OptimizerState,
    OptimizerStatus,
    QpResult,
    bfgs_update,
    line_search,
    merit,
    optimize,
    qp_solve,
    update_penalty,
)
from aerodg.optimizer.slsqp import lagrangian_gradient

EXACT = OptimizerConfig(noise_floor_ratio=0.0, kkt_tol=1e-8, max_iter=200)


def rosenbrock(x):
    return (1.0 - x[0]) ** 2 + 100.0 * (x[1] - x[0] ** 2) ** 2


def rosenbrock_grad(x):
    return np.array([-2.0 * (1.0 - x[0]) - 400.0 * x[0] * (x[1] - x[0] ** 2), 200.0 * (x[1] - x[0] ** 2)])


class TestQpSolve:
    """Active-set solution of the convex subproblem."""

    def test_equality_multiplier(self):
        result = qp_solve(np.zeros(2), np.eye(2), A_eq=[[1.0, 1.0]], c_eq=[-1.0])
        np.testing.assert_allclose(result.d, [0.5, 0.5], atol=1e-12)
        np.testing.assert_allclose(result.mu_eq, [0.5], atol=1e-12)
        assert not result.relaxed

    def test_active_inequality(self):
        result = qp_solve(np.array([-2.0, 0.0]), np.eye(2), A_in=[[1.0, 0.0]], c_in=[-1.0])
        np.testing.assert_allclose(result.d, [1.0, 0.0], atol=1e-12)
        np.testing.assert_allclose(result.mu_in, [1.0], atol=1e-12)

    def test_inactive_inequality_has_zero_multiplier(self):
        result = qp_solve(np.array([-0.5, 0.0]), np.eye(2), A_in=[[1.0, 0.0]], c_in=[-1.0])
        np.testing.assert_allclose(result.d, [0.5, 0.0], atol=1e-12)
        np.testing.assert_array_equal(result.mu_in, [0.0])

    def test_bounds(self):
        result = qp_solve(np.array([-2.0, 2.0]), np.eye(2), lower=-np.ones(2), upper=np.ones(2))
        np.testing.assert_allclose(result.d, [1.0, -1.0], atol=1e-12)
        np.testing.assert_allclose(result.mu_upper, [1.0, 0.0], atol=1e-12)
        np.testing.assert_allclose(result.mu_lower, [0.0, 1.0], atol=1e-12)

    def test_infeasible_origin_uses_phase_one(self):
        result = qp_solve(np.zeros(2), np.eye(2), A_in=[[1.0, 0.0]], c_in=[1.0])
        np.testing.assert_allclose(result.d, [-1.0, 0.0], atol=1e-9)
        assert not result.relaxed

    def test_inconsistent_linearization_is_relaxed(self):
        result = qp_solve(np.zeros(1), np.eye(1), A_in=[[1.0], [-1.0]], c_in=[1.0, 1.0])
        assert result.relaxed
        assert np.all(np.isfinite(result.d))

    def test_inconsistent_bounds(self):
        with pytest.raises(OptimizerError):
            qp_solve(np.zeros(1), np.eye(1), lower=np.ones(1), upper=np.zeros(1))


class TestBfgs:
    """Powell-damped updates."""

    def test_initial_scaling(self):
        np.testing.assert_array_equal(BfgsState.initial(3, 2.5).B, 2.5 * np.eye(3))
        np.testing.assert_array_equal(BfgsState.initial(2, 0.0).B, np.eye(2))

    def test_secant_condition(self):
        s, y = np.array([1.0, 0.5]), np.array([2.0, 1.5])
        updated = bfgs_update(BfgsState.initial(2), s, y)
        assert not updated.damped
        np.testing.assert_allclose(updated.B @ s, y)

    def test_negative_curvature_is_damped(self, rng):
        state = BfgsState.initial(4)
        for _ in range(20):
            s = rng.normal(size=4)
            state = bfgs_update(state, s, -rng.uniform(0.1, 1.0) * s + 0.1 * rng.normal(size=4))
            assert state.is_positive_definite()
        assert state.damped

    def test_zero_step(self):
        with pytest.raises(ValueError):
            bfgs_update(BfgsState.initial(2), np.zeros(2), np.ones(2))


class TestLineSearch:
    """Backtracking on the L1 merit function."""

    @staticmethod
    def quadratic(x):
        return float(x @ x), np.zeros(0), np.zeros(0)

    def test_full_step(self):
        x = np.array([1.0])
        result = line_search(self.quadratic, x, -x, self.quadratic(x), 2 * x, rho=0.0)
        assert result.success
        assert result.alpha == 1.0
        assert result.evaluations == 1

    def test_backtracks_overshoot(self):
        x = np.array([1.0])
        result = line_search(self.quadratic, x, np.array([-4.0]), self.quadratic(x), 2 * x, rho=0.0)
        assert result.success
        assert result.alpha == 0.25

    def test_failed_evaluation_is_a_rejected_trial(self):
        def values(y):
            if y[0] < 0.5:
                raise AeroDGError("solve failed", error_code="solver_diverged")
            return self.quadratic(y)

        x = np.array([1.0])
        result = line_search(values, x, -x, self.quadratic(x), 2 * x, rho=0.0)
        assert result.success
        assert result.alpha == 0.5

    def test_ascent_direction(self):
        x = np.array([1.0])
        result = line_search(self.quadratic, x, x, self.quadratic(x), 2 * x, rho=0.0)
        assert not result.success
        assert result.evaluations == 0

    def test_merit_and_penalty(self):
        assert merit(1.0, np.array([-0.5]), np.array([0.2, -3.0]), 2.0) == pytest.approx(2.4)
        assert update_penalty(3.0, 1.0) == 3.0
        assert update_penalty(0.0, 2.0, 1.1) == pytest.approx(2.2)


class TestSlsqp:
    """The full SQP iteration on analytic problems."""

    def test_equality_constrained_quadratic(self):
        problem = OptimizationProblem.from_functions(
            lambda x: float(x @ x),
            lambda x: 2.0 * x,
            np.zeros(2),
            eq=lambda x: np.array([x[0] + x[1] - 1.0]),
            eq_jac=lambda x: np.array([[1.0, 1.0]]),
        )
        result = optimize(problem, EXACT)
        assert result.success
        assert result.iterations <= 10
        np.testing.assert_allclose(result.x, [0.5, 0.5], atol=1e-8)
        np.testing.assert_allclose(result.points[-1].mu_eq, [1.0], atol=1e-6)

    def test_bounded_rosenbrock(self):
        problem = OptimizationProblem.from_functions(
            rosenbrock, rosenbrock_grad, np.array([-1.2, 1.0]), lower=np.full(2, -2.0), upper=np.full(2, 2.0)
        )
        hessians = []
        result = optimize(problem, EXACT, on_iteration=lambda s: hessians.append(BfgsState(s.B.copy())))
        assert result.status is OptimizerStatus.CONVERGED
        np.testing.assert_allclose(result.x, [1.0, 1.0], atol=1e-6)
        assert all(h.is_positive_definite() for h in hessians)

    def test_active_inequality(self):
        problem = OptimizationProblem.from_functions(
            lambda x: (x[0] - 2.0) ** 2 + (x[1] - 1.0) ** 2,
            lambda x: np.array([2.0 * (x[0] - 2.0), 2.0 * (x[1] - 1.0)]),
            np.zeros(2),
            ineq=lambda x: np.array([x[0] + x[1] - 2.0]),
            ineq_jac=lambda x: np.array([[1.0, 1.0]]),
        )
        result = optimize(problem, EXACT)
        assert result.success
        np.testing.assert_allclose(result.x, [1.5, 0.5], atol=1e-7)
        np.testing.assert_allclose(result.points[-1].mu_in, [1.0], atol=1e-5)
        assert result.points[-1].feasibility <= EXACT.feasibility_tol

    def test_zero_iterations(self):
        problem = OptimizationProblem.from_functions(rosenbrock, rosenbrock_grad, np.array([-1.2, 1.0]))
        result = optimize(problem, OptimizerConfig(max_iter=0))
        assert result.status is OptimizerStatus.MAX_ITERATIONS
        np.testing.assert_array_equal(result.x, [-1.2, 1.0])
        assert len(result.history) == 1

    def test_wrong_gradient_fails_line_search(self):
        problem = OptimizationProblem.from_functions(lambda x: float(x @ x), lambda x: -2.0 * x, np.array([1.0, -1.0]))
        result = optimize(problem, EXACT)
        assert result.status is OptimizerStatus.LINE_SEARCH_FAILURE
        np.testing.assert_array_equal(result.x, [1.0, -1.0])
        assert not result.success

    def test_gradient_failure_returns_best_feasible_point(self):
        calls = {"n": 0}

        def grad(x):
            calls["n"] += 1
            if calls["n"] > 2:
                raise AeroDGError("adjoint failed", error_code="adjoint_failed")
            return rosenbrock_grad(x)

        problem = OptimizationProblem.from_functions(rosenbrock, grad, np.array([-1.2, 1.0]))
        result = optimize(problem, EXACT)
        assert result.status is OptimizerStatus.CALLBACK_FAILURE
        assert result.f <= rosenbrock(np.array([-1.2, 1.0]))
        assert result.f == pytest.approx(rosenbrock(result.x))

    def test_history_and_callback(self):
        seen = []
        problem = OptimizationProblem.from_functions(rosenbrock, rosenbrock_grad, np.array([-1.2, 1.0]))
        problem.describe = lambda x: {"Cd": float(x[0])}
        result = optimize(problem, OptimizerConfig(max_iter=4, noise_floor_ratio=0.0), on_iteration=lambda s: seen.append(s.iteration))
        assert seen == [0, 1, 2, 3, 4]
        history = result.history
        for column in ("iter", "feasibility", "kkt_norm", "merit", "alpha", "rho", "relaxed", "Cd"):
            assert column in history.columns
        assert list(history["iter"]) == [0, 1, 2, 3, 4]

    def test_resume_reproduces_the_uninterrupted_run(self):
        problem = OptimizationProblem.from_functions(
            rosenbrock, rosenbrock_grad, np.array([-1.2, 1.0]), lower=np.full(2, -2.0), upper=np.full(2, 2.0)
        )
        full = optimize(problem, EXACT)
        partial = optimize(problem, EXACT.model_copy(update={"max_iter": 5}))
        restored = OptimizerState.from_arrays(partial.state.arrays())
        resumed = optimize(problem, EXACT, state=restored)
        np.testing.assert_array_equal(resumed.x, full.x)
        assert resumed.iterations == full.iterations

    def test_noise_floor_loosens_the_tolerance(self):
        problem = OptimizationProblem.from_functions(rosenbrock, rosenbrock_grad, np.array([-1.2, 1.0]))
        result = optimize(problem, OptimizerConfig(max_iter=0, noise_floor_ratio=1e-2))
        assert result.state.tolerance == pytest.approx(1e-2 * np.abs(rosenbrock_grad(np.array([-1.2, 1.0]))).max())

    def test_debug_mode_runs_clean(self):
        problem = OptimizationProblem.from_functions(rosenbrock, rosenbrock_grad, np.array([-1.2, 1.0]))
        assert optimize(problem, EXACT, debug=True).success

    def test_invalid_bounds(self):
        with pytest.raises(OptimizerError) as info:
            OptimizationProblem.from_functions(rosenbrock, rosenbrock_grad, np.zeros(2), lower=np.ones(2), upper=np.zeros(2))
        assert info.value.exit_code == 5


def test_lagrangian_gradient_signs():
    qp = QpResult(
        d=np.zeros(2),
        mu_eq=np.array([2.0]),
        mu_in=np.array([3.0]),
        mu_lower=np.array([0.5, 0.0]),
        mu_upper=np.array([0.0, 0.25]),
    )
    grad = lagrangian_gradient(np.array([1.0, 1.0]), np.array([[1.0, 0.0]]), np.array([[0.0, 1.0]]), qp)
    np.testing.assert_allclose(grad, [1.0 - 2.0 - 0.5, 1.0 + 3.0 + 0.25])
