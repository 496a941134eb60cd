"""BFGS with a strong-Wolfe line search for the inner variational optimizations."""

import numpy as np
import warnings
from collections.abc import Callable
from loguru import logger
from numpy.typing import NDArray
from pydantic import Field
from scipy.optimize import line_search

from renyi_adapt.models.base import BaseRenyiModel, FrozenRenyiModel, OptimTermination
from renyi_adapt.utils.errors import ParameterError


Objective = Callable[[NDArray[np.float64]], float]
Gradient = Callable[[NDArray[np.float64]], NDArray[np.float64]]

CURVATURE_TOL = 1e-12


class OptimizerOptions(FrozenRenyiModel):
    """Inner-loop settings."""

    g_tol: float = Field(default=1e-8, gt=0.0, description="Stop when ||grad||_inf < g_tol")
    max_iter: int = Field(default=1000, ge=0, description="Maximum BFGS iterations")
    c1: float = Field(default=1e-4, gt=0.0, lt=1.0, description="Sufficient-decrease constant")
    c2: float = Field(default=0.9, gt=0.0, lt=1.0, description="Curvature constant")
    line_search_max_iter: int = Field(default=40, ge=1, description="Line-search bracketing/zoom steps")


class OptimResult(BaseRenyiModel):
    """Outcome of one minimize() call."""

    x_final: NDArray[np.float64] = Field(description="Best parameters found")
    f_final: float = Field(description="Objective at x_final")
    grad_final_norm: float = Field(description="||grad||_inf at x_final")
    iterations: int = Field(ge=0, description="Accepted BFGS steps")
    f_evals: int = Field(ge=0, description="Objective evaluations, line-search trials included")
    converged: bool = Field(description="True when the gradient tolerance was met")
    termination: OptimTermination
    f_history: list[float] = Field(default_factory=list, description="Objective value per evaluation")


class _CountingObjective:
    """Counts evaluations and memoizes the gradient at the last point."""

    def __init__(self, f: Objective, grad: Gradient) -> None:
        self._f = f
        self._grad = grad
        self.history: list[float] = []
        self._grad_x: NDArray[np.float64] | None = None
        self._grad_value: NDArray[np.float64] | None = None

    def value(self, x: NDArray[np.float64]) -> float:
        fx = float(self._f(x))
        self.history.append(fx)
        return fx

    def gradient(self, x: NDArray[np.float64]) -> NDArray[np.float64]:
        if self._grad_x is None or not np.array_equal(x, self._grad_x):
            self._grad_x = np.array(x, copy=True)
            self._grad_value = np.asarray(self._grad(x), dtype=float)
        assert self._grad_value is not None
        return self._grad_value


def minimize(
    f: Objective, grad: Gradient, x0: NDArray[np.float64] | list[float], opts: OptimizerOptions | None = None
) -> OptimResult:
    """Minimize ``f`` with BFGS, starting from an identity inverse Hessian.

    Args:
        f: Objective, safe for repeated sequential calls.
        grad: Analytic gradient of ``f``.
        x0: Starting point; ``f`` must be finite there.
        opts: Tolerances; defaults to g_tol=1e-8, max_iter=1000.

    Returns:
        OptimResult: Final point, counts and termination reason. A failed line search is reported
        as ``LineSearchFail`` with the best point so far, never raised.
    """
    opts = opts or OptimizerOptions()
    objective = _CountingObjective(f, grad)
    x = np.array(x0, dtype=float, copy=True).reshape(-1)
    n = x.size

    fx = objective.value(x)
    if not np.isfinite(fx):
        raise ParameterError(f"Objective is not finite at the starting point: {fx}")
    g = objective.gradient(x)
    identity = np.eye(n)
    h_inv = identity.copy()
    iterations = 0
    reset_pending = False
    termination = OptimTermination.MAX_ITER

    while True:
        g_norm = float(np.max(np.abs(g), initial=0.0))
        if g_norm < opts.g_tol:
            termination = OptimTermination.GRAD_TOL
            break
        if iterations >= opts.max_iter:
            termination = OptimTermination.MAX_ITER
            break

        direction = -h_inv @ g
        if direction @ g >= 0:
            h_inv = identity.copy()
            direction = -g

        with warnings.catch_warnings():
            # a failed search surfaces as alpha=None plus a LineSearchWarning (a RuntimeWarning)
            warnings.simplefilter("ignore", RuntimeWarning)
            alpha, _, _, f_new, _, g_new = line_search(
                objective.value,
                objective.gradient,
                x,
                direction,
                gfk=g,
                old_fval=fx,
                c1=opts.c1,
                c2=opts.c2,
                maxiter=opts.line_search_max_iter,
            )

        if alpha is None or f_new is None or f_new > fx:
            if not reset_pending and not np.array_equal(h_inv, identity):
                logger.debug(f"Line search failed at iteration {iterations}; resetting inverse Hessian")
                h_inv = identity.copy()
                reset_pending = True
                continue
            logger.warning(f"Line search failed at iteration {iterations} (||g||_inf={g_norm:.3e})")
            termination = OptimTermination.LINE_SEARCH_FAIL
            break
        reset_pending = False

        step = alpha * direction
        x_new = x + step
        g_new = objective.gradient(x_new) if g_new is None else np.asarray(g_new, dtype=float)
        y = g_new - g
        curvature = float(y @ step)
        if curvature > CURVATURE_TOL * np.linalg.norm(y) * np.linalg.norm(step):
            rho = 1.0 / curvature
            left = identity - rho * np.outer(step, y)
            h_inv = left @ h_inv @ left.T + rho * np.outer(step, step)

        x, fx, g = x_new, float(f_new), g_new
        iterations += 1
        logger.trace(f"BFGS iteration {iterations}: f={fx:.12e} ||g||_inf={np.max(np.abs(g)):.3e}")

    return OptimResult(
        x_final=x,
        f_final=fx,
        grad_final_norm=float(np.max(np.abs(g), initial=0.0)),
        iterations=iterations,
        f_evals=len(objective.history),
        converged=termination == OptimTermination.GRAD_TOL,
        termination=termination,
        f_history=objective.history,
    )
