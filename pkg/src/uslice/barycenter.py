"""USOT barycenters on a fixed support.

The barycenter weights are optimized by accelerated mirror descent on the
probability simplex. The gradient of the USOT value with respect to the
weights of its second argument is read off the final dual potentials.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .divergences import EXP_CLAMP, UnbalancedParams, phi_circ
from .measures import DiscreteMeasure, MeasureError, check_solver_input
from .slicing import ProjectionSet, sample_directions
from .usot import usot

SIMPLEX_TOL = 1e-9


@dataclass(frozen=True)
class GridMeasure:
    """Probability vector on a fixed support of G points in R^d."""

    grid_points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.grid_points, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if x.shape[0] != w.shape[0]:
            raise MeasureError(f"{x.shape[0]} grid points but {w.shape[0]} weights")
        if not np.all(np.isfinite(x)) or not np.all(np.isfinite(w)):
            raise MeasureError("non-finite grid data")
        if np.any(w < 0) or abs(w.sum() - 1.0) > SIMPLEX_TOL:
            raise MeasureError(f"grid weights must lie on the simplex (sum {w.sum()!r})")
        x.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "grid_points", x)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, grid_points) -> "GridMeasure":
        n = np.asarray(grid_points).shape[0]
        return cls(grid_points, np.full(n, 1.0 / n))

    def as_measure(self) -> DiscreteMeasure:
        return DiscreteMeasure(self.grid_points, self.weights)


def regular_grid(rows: int, cols: int) -> np.ndarray:
    """Cell centres of a ``rows x cols`` raster on the unit square, row-major.

    Cell ``(r, c)`` sits at ``((c + 0.5) / cols, (r + 0.5) / rows)``.
    """
    r, c = np.meshgrid(np.arange(rows), np.arange(cols), indexing="ij")
    return np.column_stack([(c.ravel() + 0.5) / cols, (r.ravel() + 0.5) / rows])


@dataclass
class BarycenterProblem:
    """Weighted USOT barycenter of ``inputs`` supported on ``grid``.

    ``params.rho1`` penalizes the data side, ``params.rho2`` the barycenter.
    """

    inputs: list
    omegas: np.ndarray
    grid: np.ndarray
    params: UnbalancedParams = field(default_factory=UnbalancedParams)
    lr: float = 1.0
    iters: int = 500

    def __post_init__(self):
        if len(self.inputs) == 0:
            raise ValueError("need at least one input measure")
        om = np.asarray(self.omegas, dtype=float).reshape(-1)
        if om.shape[0] != len(self.inputs):
            raise ValueError(f"{len(self.inputs)} inputs but {om.shape[0]} weights")
        if np.any(om < 0) or not np.all(np.isfinite(om)) or abs(om.sum() - 1.0) > SIMPLEX_TOL:
            raise ValueError("barycentric weights must be >= 0 and sum to 1")
        self.omegas = om
        self.grid = np.asarray(self.grid, dtype=float)
        if self.grid.ndim == 1:
            self.grid = self.grid[:, None]
        for k, m in enumerate(self.inputs):
            check_solver_input(m, f"input {k}")
            if m.dim != self.grid.shape[1]:
                raise MeasureError(f"input {k} lives in R^{m.dim}, grid in R^{self.grid.shape[1]}")
        if not self.lr > 0:
            raise ValueError("lr must be > 0")
        if self.iters < 1:
            raise ValueError("iters must be >= 1")


def _usot_and_gradient(alpha, beta: GridMeasure, dirs, params):
    value, state = usot(alpha, beta.as_measure(), dirs, params)
    _, g = state.recentred()
    return value, phi_circ(params.div2, g)


def usot_gradient_wrt_beta(alpha: DiscreteMeasure, beta: GridMeasure,
                           dirs: ProjectionSet | None, params: UnbalancedParams) -> np.ndarray:
    """Gradient of ``USOT(alpha, beta)`` in the weights of ``beta``.

    By the envelope argument it equals ``phi2°(g - lam)`` evaluated at the
    final dual potentials of the inner solve, so its accuracy follows the
    inner FW budget.
    """
    return _usot_and_gradient(alpha, beta, dirs, params)[1]


def _mirror_step(base, grad, step):
    # base * exp(-step * grad), normalized; shift the exponent before clamping
    e = -step * grad
    e = np.clip(e - e.max(), -EXP_CLAMP, 0.0)
    w = base * np.exp(e)
    return w / w.sum()


def barycenter(problem: BarycenterProblem, callback=None) -> GridMeasure:
    """Run ``problem.iters`` steps of accelerated mirror descent.

    Starts from uniform weights. Step ``t`` (from 1) uses ``gamma = 2/(t+1)``
    and directions drawn from seed ``params.seed ^ t``, shared by all inputs.
    The multiplicative update is taken from the current query point, so a
    cell whose weight reaches 0 stays at 0.

    ``callback(t, beta, beta_tilde, beta_hat, objective)`` is called after
    each step; ``objective`` is the weighted sum of USOT values at ``beta``.
    """
    pr = problem
    params = pr.params
    G, d = pr.grid.shape
    uniform = np.full(G, 1.0 / G)
    b_tilde = uniform.copy()
    b_hat = uniform.copy()
    for t in range(1, pr.iters + 1):
        gamma = 2.0 / (t + 1.0)
        beta = (1.0 - gamma) * b_hat + gamma * b_tilde
        beta /= beta.sum()
        dirs = sample_directions(d, params.n_projections, params.seed ^ t)
        query = GridMeasure(pr.grid, beta)
        grad = np.zeros(G)
        objective = 0.0
        for om, alpha in zip(pr.omegas, pr.inputs):
            if om == 0:
                continue
            val, gb = _usot_and_gradient(alpha, query, dirs, params)
            grad += om * gb
            objective += om * val
        b_tilde = _mirror_step(beta, grad, pr.lr / gamma)
        b_hat = (1.0 - gamma) * b_hat + gamma * b_tilde
        b_hat /= b_hat.sum()
        if callback is not None:
            callback(t, beta, b_tilde, b_hat, objective)
    return GridMeasure(pr.grid, b_hat)
