"""Sliced unbalanced OT: one KL-relaxed 1D problem per direction."""

from __future__ import annotations

import numpy as np

from .divergences import SolverError, UnbalancedParams
from .fw import FWState, _exp_factor, fw_slices
from .measures import DiscreteMeasure, check_solver_input, reweight
from .slicing import ProjectionSet, project_all, sample_directions


def _directions(alpha, dirs, params):
    if dirs is None:
        return sample_directions(alpha.dim, params.n_projections, params.seed)
    if dirs.K == 0:
        raise SolverError("need at least one projection direction")
    return dirs


def _scatter(sorted_vals, perm):
    out = np.empty_like(sorted_vals)
    np.put_along_axis(out, perm, sorted_vals, axis=1)
    return out


def suot(alpha: DiscreteMeasure, beta: DiscreteMeasure, dirs: ProjectionSet | None,
         params: UnbalancedParams):
    """Average over ``dirs`` of the 1D unbalanced OT between projections.

    Each slice keeps its own potentials; all slices share the FW step
    schedule. When ``dirs`` is None, ``params.n_projections`` directions are
    drawn from ``params.seed``.

    Returns
    -------
    value : float
        Mean over slices of the per-slice dual values at the final iterate.
    state : FWState
        Per-slice potentials on original atom indices, shape (K, n) / (K, m).
    """
    params.require_smooth()
    check_solver_input(alpha, "alpha")
    check_solver_input(beta, "beta")
    dirs = _directions(alpha, dirs, params)
    xs, px = project_all(alpha.points, dirs)
    ys, py = project_all(beta.points, dirs)
    vals, f, g, lam, trace = fw_slices(xs, alpha.weights[px], ys, beta.weights[py], params)
    state = FWState("suot", _scatter(f, px), _scatter(g, py), lam,
                    iteration=len(trace), trace=trace, n_projections=dirs.K)
    return float(np.mean(vals)), state


def suot_marginals(state: FWState, alpha: DiscreteMeasure, beta: DiscreteMeasure,
                   dirs: ProjectionSet, params: UnbalancedParams):
    """Optimal marginal pair of every slice, as reweightings of the inputs."""
    if state.kind != "suot":
        raise ValueError(f"expected a SUOT state, got {state.kind!r}")
    K = dirs.K if dirs is not None else params.n_projections
    if state.f.shape != (K, alpha.n) or state.g.shape != (K, beta.n):
        raise ValueError("state does not match the given measures and directions")
    fr, gr = state.recentred()
    return [(reweight(alpha, _exp_factor(fr[k], params.rho1)),
             reweight(beta, _exp_factor(gr[k], params.rho2))) for k in range(K)]
