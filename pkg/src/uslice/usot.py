"""Unbalanced sliced OT: a single KL relaxation shared by all slices.

The Frank-Wolfe iterate is a pair of potentials on the original atoms.
Each step reweights the inputs, solves balanced 1D OT on every projection,
and averages the per-slice oracle potentials back onto the atoms.
"""

from __future__ import annotations

import numpy as np

from .divergences import UnbalancedParams
from .fw import FWState, _check_positive_mass, _exp_factor, _lambda, _norm_weights, _stalled
from .fw import dual_value, fw_step
from .measures import DiscreteMeasure, check_solver_input, reweight
from .ot1d import nw_batch
from .slicing import ProjectionSet, project_all, sample_directions
from .suot import _directions


def avg_pot(per_slice, perms) -> np.ndarray:
    """Average sorted-order slice potentials onto the original atoms.

    ``per_slice[k, j]`` is the potential of the atom ``perms[k, j]``.
    """
    per_slice = np.atleast_2d(np.asarray(per_slice, dtype=float))
    perms = np.atleast_2d(np.asarray(perms))
    if per_slice.shape != perms.shape:
        raise ValueError(f"potentials {per_slice.shape} and permutations {perms.shape} differ")
    out = np.empty_like(per_slice)
    np.put_along_axis(out, perms, per_slice, axis=1)
    return out.mean(axis=0)


def _run(alpha, beta, params, slices, kind, n_proj):
    """Shared FW loop; ``slices(t)`` gives the sorted projections for step t."""
    params.require_smooth()
    check_solver_input(alpha, "alpha")
    check_solver_input(beta, "beta")
    r1, r2 = params.rho1, params.rho2
    a, b = alpha.weights, beta.weights
    _check_positive_mass(a, b)
    f = np.zeros(alpha.n)
    g = np.zeros(beta.n)
    lam = _lambda(f, a, g, b, r1, r2)
    trace = []
    for t in range(params.fw_iters):
        pi1, pi2, _ = _norm_weights(a, b, f, g, r1, r2, lam)
        xs, px, ys, py = slices(t)
        _, r, s = nw_batch(xs, pi1[px], ys, pi2[py], params.p)
        f, g = fw_step(f, g, avg_pot(r, px), avg_pot(s, py), t)
        lam = _lambda(f, a, g, b, r1, r2)
        trace.append(float(dual_value(f, g, a, b, lam, params)))
        if _stalled(trace, params.fw_tol):
            break
    state = FWState(kind, f, g, np.asarray(lam), iteration=len(trace), trace=trace,
                    n_projections=n_proj)
    return trace[-1], state


def usot(alpha: DiscreteMeasure, beta: DiscreteMeasure, dirs: ProjectionSet | None,
         params: UnbalancedParams):
    """USOT with a fixed set of directions.

    Returns the dual value at the final averaged potentials and the state.
    """
    params.require_smooth()
    dirs = _directions(alpha, dirs, params)
    xs, px = project_all(alpha.points, dirs)
    ys, py = project_all(beta.points, dirs)
    return _run(alpha, beta, params, lambda t: (xs, px, ys, py), "usot", dirs.K)


def usot_stochastic(alpha: DiscreteMeasure, beta: DiscreteMeasure, params: UnbalancedParams):
    """USOT drawing ``params.n_projections`` fresh directions at every step.

    Step ``t`` uses the directions sampled from seed ``params.seed ^ t``, so a
    run is replayable from ``params`` alone. The reported value is a Monte
    Carlo estimate rather than a certified dual value.
    """
    d, K = alpha.dim, params.n_projections

    def slices(t):
        dirs = sample_directions(d, K, params.seed ^ t)
        return (*project_all(alpha.points, dirs), *project_all(beta.points, dirs))

    return _run(alpha, beta, params, slices, "usot-stochastic", K)


def usot_marginals(state: FWState, alpha: DiscreteMeasure, beta: DiscreteMeasure,
                   params: UnbalancedParams):
    """The relaxed marginals ``(pi1, pi2)``; the same for every direction."""
    if not state.kind.startswith("usot"):
        raise ValueError(f"expected a USOT state, got {state.kind!r}")
    if state.f.shape != (alpha.n,) or state.g.shape != (beta.n,):
        raise ValueError("state does not match the given measures")
    fr, gr = state.recentred()
    return (reweight(alpha, _exp_factor(fr, params.rho1)),
            reweight(beta, _exp_factor(gr, params.rho2)))
