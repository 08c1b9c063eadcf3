"""Exact balanced OT on the real line.

The loss is the quantile-function closed form evaluated on the common
refinement of the two CDF jump sets. Dual potentials come from the
north-west corner rule: the monotone coupling walks a staircase through the
(sorted) cost matrix, and the potentials are propagated along it so that
``f[i] + g[j] = |x_i - y_j|^p`` on every visited cell, with ``f[0] = 0``.
For a convex cost the staircase property makes them feasible everywhere.

All kernels work on a batch of K problems (one per slice) at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .divergences import SolverError
from .measures import DiscreteMeasure, Measure1D
from .slicing import ProjectionSet, project_all

MASS_RTOL = 1e-9


class UnbalancedInputError(SolverError):
    """The balanced solver received measures of different total mass."""


@dataclass(frozen=True)
class DualPotentials:
    f: np.ndarray
    g: np.ndarray


def _check_masses(ma, mb):
    ma = np.asarray(ma, dtype=float)
    mb = np.asarray(mb, dtype=float)
    scale = np.maximum(1.0, np.maximum(np.abs(ma), np.abs(mb)))
    if np.any(np.abs(ma - mb) > MASS_RTOL * scale):
        worst = float(np.max(np.abs(ma - mb)))
        raise UnbalancedInputError(
            f"balanced oracle called on unbalanced inputs (mass gap {worst:.3e})")


def _staircase(a, b, rows_first: bool = True):
    """Cells visited by the north-west corner walk, for K problems.

    ``a`` (K, n) and ``b`` (K, m) are weights in sorted-support order.
    Returns the row/column index of each of the n + m - 1 cells, the mass
    each cell carries, which moves advanced the row, and a per-problem flag
    telling whether some row move and column move happened at the same
    cumulative mass (a tie, where the walk had a free choice).
    """
    K, n = a.shape
    m = b.shape[1]
    ca = np.cumsum(a, axis=1)
    cb = np.cumsum(b, axis=1)
    _check_masses(ca[:, -1], cb[:, -1])
    if rows_first:
        events = np.concatenate([ca[:, :-1], cb[:, :-1]], axis=1)
        row_move = np.concatenate([np.ones(n - 1, bool), np.zeros(m - 1, bool)])
    else:
        events = np.concatenate([cb[:, :-1], ca[:, :-1]], axis=1)
        row_move = np.concatenate([np.zeros(m - 1, bool), np.ones(n - 1, bool)])
    order = np.argsort(events, axis=1, kind="stable")
    t = np.take_along_axis(events, order, axis=1)
    step_i = row_move[order]
    ties = np.any((step_i[:, :-1] != step_i[:, 1:]) & (t[:, :-1] == t[:, 1:]), axis=1)
    zero = np.zeros((K, 1), dtype=np.intp)
    ii = np.concatenate([zero, np.cumsum(step_i, axis=1)], axis=1)
    jj = np.concatenate([zero, np.cumsum(~step_i, axis=1)], axis=1)
    total = 0.5 * (ca[:, -1:] + cb[:, -1:])
    bounds = np.concatenate([np.zeros((K, 1)), t, total], axis=1)
    # rounding can make the last interior breakpoint overshoot the total
    dt = np.maximum(np.diff(bounds, axis=1), 0.0)
    return ii, jj, dt, step_i, ties


def _cost(u, v, p):
    d = np.abs(u - v)
    return d if p == 1 else d ** p


def _path_potentials(x, y, ii, jj, step_i, cpath):
    # f[i] + g[j] = C(i, j) on every cell of the walk, f[0] = 0
    dc = np.diff(cpath, axis=1)
    K = x.shape[0]
    fpath = np.concatenate([np.zeros((K, 1)), np.cumsum(np.where(step_i, dc, 0.0), axis=1)], axis=1)
    gpath = cpath[:, :1] + np.concatenate(
        [np.zeros((K, 1)), np.cumsum(np.where(step_i, 0.0, dc), axis=1)], axis=1)
    f = np.empty_like(x)
    g = np.empty_like(y)
    # every row/column index appears on the walk, so this fills f and g
    np.put_along_axis(f, ii, fpath, axis=1)
    np.put_along_axis(g, jj, gpath, axis=1)
    return f, g


def nw_batch(x, a, y, b, p: float = 2.0, need_potentials: bool = True):
    """Batched 1D OT loss and potentials on sorted supports.

    Where the walk hits a tie (a row and a column are exhausted at the same
    cumulative mass) both ways of resolving it give optimal dual vertices;
    the midpoint of the two is returned. It is still optimal and feasible,
    it is symmetric under swapping the two measures, and it gives zero
    potentials for identical inputs.

    Parameters
    ----------
    x, a : ndarray, shape (K, n)
        Sorted positions and weights of the first measures.
    y, b : ndarray, shape (K, m)
        Sorted positions and weights of the second measures.
    p : float
        Cost exponent, ``C(x, y) = |x - y|^p``.

    Returns
    -------
    loss : ndarray, shape (K,)
    f : ndarray, shape (K, n) or None
    g : ndarray, shape (K, m) or None
    """
    ii, jj, dt, step_i, ties = _staircase(a, b)
    cpath = _cost(np.take_along_axis(x, ii, axis=1), np.take_along_axis(y, jj, axis=1), p)
    loss = np.sum(dt * cpath, axis=1)
    if not need_potentials:
        return loss, None, None
    f, g = _path_potentials(x, y, ii, jj, step_i, cpath)
    if np.any(ties):
        x2, y2 = x[ties], y[ties]
        ii2, jj2, _, step2, _ = _staircase(a[ties], b[ties], rows_first=False)
        cpath2 = _cost(np.take_along_axis(x2, ii2, axis=1), np.take_along_axis(y2, jj2, axis=1), p)
        f2, g2 = _path_potentials(x2, y2, ii2, jj2, step2, cpath2)
        f[ties] = 0.5 * (f[ties] + f2)
        g[ties] = 0.5 * (g[ties] + g2)
    return loss, f, g


def _as_sorted(mu: Measure1D):
    return mu if mu.sorted else mu.sort()


def ot1d_loss(mu: Measure1D, nu: Measure1D, p: float = 2.0) -> float:
    """``int_0^M |F_mu^{-1}(t) - F_nu^{-1}(t)|^p dt`` for equal masses M."""
    mu, nu = _as_sorted(mu), _as_sorted(nu)
    loss, _, _ = nw_batch(mu.positions[None], mu.weights[None],
                          nu.positions[None], nu.weights[None], p, need_potentials=False)
    return float(loss[0])


def ot1d_duals(mu: Measure1D, nu: Measure1D, p: float = 2.0):
    """Loss and optimal dual potentials of 1D balanced OT.

    Potentials are returned in the order of the atoms of ``mu`` and ``nu``
    as given (for sorted inputs this is the sorted order). The atom with the
    smallest position of ``mu`` carries ``f = 0``. Values on zero-weight
    atoms are some feasible extension and are not unique.
    """
    smu, snu = _as_sorted(mu), _as_sorted(nu)
    loss, f, g = nw_batch(smu.positions[None], smu.weights[None],
                          snu.positions[None], snu.weights[None], p)
    fo = np.empty(mu.weights.shape[0])
    go = np.empty(nu.weights.shape[0])
    # map sorted order back to the caller's order
    fo[_rank(mu, smu)] = f[0]
    go[_rank(nu, snu)] = g[0]
    return float(loss[0]), DualPotentials(fo, go)


def _rank(orig: Measure1D, srt: Measure1D):
    if orig is srt:
        return np.arange(orig.weights.shape[0])
    # srt.perm is expressed in orig.perm's index space
    pos_of = np.empty_like(orig.perm)
    pos_of[orig.perm] = np.arange(orig.perm.shape[0])
    return pos_of[srt.perm]


def dual_value(mu: Measure1D, nu: Measure1D, pots: DualPotentials) -> float:
    return float(np.dot(pots.f, mu.weights) + np.dot(pots.g, nu.weights))


def sliced_ot_loss(alpha: DiscreteMeasure, beta: DiscreteMeasure,
                   dirs: ProjectionSet, p: float = 2.0) -> float:
    """Monte-Carlo sliced OT, the uniform average of 1D OT over ``dirs``."""
    _check_masses(alpha.mass(), beta.mass())
    xs, px = project_all(alpha.points, dirs)
    ys, py = project_all(beta.points, dirs)
    loss, _, _ = nw_batch(xs, alpha.weights[px], ys, beta.weights[py], p, need_potentials=False)
    return float(np.mean(loss))
