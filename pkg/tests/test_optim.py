"""Unit tests for the BFGS inner optimizer."""

import numpy as np
import pytest
from scipy.optimize import rosen, rosen_der

from renyi_adapt.models.base import OptimTermination
from renyi_adapt.simulation.optim import OptimizerOptions, minimize
from renyi_adapt.utils.errors import ParameterError


def quadratic(x):
    return float(0.5 * x @ x)


def quadratic_grad(x):
    return np.asarray(x, dtype=float)


class TestMinimize:
    """Test cases for minimize()."""

    def test_quadratic(self):
        """Test that an isotropic quadratic is solved in a few steps."""
        result = minimize(quadratic, quadratic_grad, [1.0, -2.0, 0.5])
        assert result.converged
        assert result.termination == OptimTermination.GRAD_TOL
        assert result.iterations <= 3
        np.testing.assert_allclose(result.x_final, 0.0, atol=1e-8)
        assert result.grad_final_norm < 1e-8

    def test_rosenbrock(self):
        """Test convergence to (1, 1) on the Rosenbrock valley."""
        result = minimize(rosen, rosen_der, [-1.2, 1.0])
        assert result.converged
        np.testing.assert_allclose(result.x_final, [1.0, 1.0], atol=1e-6)
        assert result.f_final < 1e-12

    def test_non_finite_start(self):
        """Test that a non-finite starting value is rejected."""
        with pytest.raises(ParameterError):
            minimize(lambda x: float("nan"), quadratic_grad, [1.0])

    def test_zero_iterations(self):
        """Test max_iter = 0 returns the start after one evaluation."""
        result = minimize(quadratic, quadratic_grad, [1.0, 1.0], OptimizerOptions(max_iter=0))
        assert result.termination == OptimTermination.MAX_ITER
        assert not result.converged
        assert result.iterations == 0
        assert result.f_evals == 1
        np.testing.assert_array_equal(result.x_final, [1.0, 1.0])

    def test_stationary_start(self):
        """Test that a zero gradient at the start stops immediately."""
        result = minimize(quadratic, quadratic_grad, [0.0, 0.0])
        assert result.termination == OptimTermination.GRAD_TOL
        assert result.iterations == 0

    def test_empty_parameter_vector(self):
        """Test that zero parameters converge trivially."""
        result = minimize(lambda x: 1.5, lambda x: np.zeros(0), [])
        assert result.converged
        assert result.f_final == 1.5

    def test_wrong_gradient_fails_line_search(self):
        """Test that an ascent direction is reported as LineSearchFail, not raised."""
        result = minimize(quadratic, lambda x: -np.asarray(x, dtype=float), [1.0, 2.0])
        assert result.termination == OptimTermination.LINE_SEARCH_FAIL
        assert not result.converged
        np.testing.assert_array_equal(result.x_final, [1.0, 2.0])

    def test_history_counts_every_evaluation(self):
        """Test that f_history has one entry per objective call."""
        result = minimize(rosen, rosen_der, [-1.2, 1.0])
        assert len(result.f_history) == result.f_evals
        assert result.f_history[0] == pytest.approx(rosen(np.array([-1.2, 1.0])))

    def test_deterministic(self):
        """Test that repeated runs give identical results."""
        a = minimize(rosen, rosen_der, [-1.2, 1.0])
        b = minimize(rosen, rosen_der, [-1.2, 1.0])
        np.testing.assert_array_equal(a.x_final, b.x_final)
        assert a.f_history == b.f_history

    def test_scaled_objective_same_minimizer(self):
        """Test that minimizing c f with g_tol scaled by c finds the same point."""
        a = np.array([[3.0, 1.0], [1.0, 2.0]])
        b = np.array([1.0, -1.0])

        def f(x, c=1.0):
            return float(c * (0.5 * x @ a @ x - b @ x))

        def grad(x, c=1.0):
            return c * (a @ x - b)

        plain = minimize(f, grad, [2.0, 2.0])
        scaled = minimize(
            lambda x: f(x, 10.0), lambda x: grad(x, 10.0), [2.0, 2.0], OptimizerOptions(g_tol=1e-7)
        )
        np.testing.assert_allclose(scaled.x_final, plain.x_final, atol=5e-8)
        np.testing.assert_allclose(plain.x_final, np.linalg.solve(a, b), atol=5e-8)

    def test_does_not_mutate_start(self):
        """Test that x0 is copied."""
        x0 = np.array([1.0, -1.0])
        minimize(quadratic, quadratic_grad, x0)
        np.testing.assert_array_equal(x0, [1.0, -1.0])


class TestOptimizerOptions:
    """Test cases for OptimizerOptions validation."""

    def test_defaults(self):
        """Test the default tolerances."""
        opts = OptimizerOptions()
        assert opts.g_tol == 1e-8
        assert opts.max_iter == 1000

    def test_rejects_non_positive_tolerance(self):
        """Test that g_tol must be positive."""
        from pydantic import ValidationError

        with pytest.raises(ValidationError):
            OptimizerOptions(g_tol=0.0)
