"""Frank-Wolfe building blocks for the KL-relaxed problems.

Every solver in the package runs the same loop: translate the current
potentials by the optimal constant, reweight the inputs so that their masses
agree, ask a balanced 1D solver for the linear-oracle potentials, and take a
convex step. The helpers below are batched over a leading slice axis.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .divergences import EXP_CLAMP, UnbalancedParams, phi_circ
from .measures import DiscreteMeasure, Measure1D, MeasureError
from .ot1d import DualPotentials, nw_batch


@dataclass
class FWState:
    """Potentials and bookkeeping left behind by a Frank-Wolfe run.

    For ``kind == "suot"`` the arrays ``f`` (K, n) and ``g`` (K, m) hold one
    pair of potentials per slice; for the USOT variants they are averaged
    potentials of shape (n,) and (m,). Either way entries are indexed by the
    ORIGINAL atom order. ``lam`` is the optimal translation at the final
    iterate (one per slice, or a scalar), ``trace[t]`` the dual value after
    step ``t``.
    """

    kind: str
    f: np.ndarray
    g: np.ndarray
    lam: np.ndarray
    iteration: int = 0
    trace: list = field(default_factory=list)
    n_projections: int = 1

    @property
    def value(self) -> float:
        return self.trace[-1] if self.trace else float("nan")

    def recentred(self):
        """Potentials ``(f + lam, g - lam)`` at which the dual value is reported."""
        lam = np.asarray(self.lam)
        if lam.ndim:
            lam = lam[:, None]
        return self.f + lam, self.g - lam


def _weights(m):
    if isinstance(m, (DiscreteMeasure, Measure1D)):
        return m.weights
    return np.asarray(m, dtype=float)


def _log_integral(f, a, rho):
    # log sum_i a_i exp(-f_i / rho); zero weights drop out of the sum
    with np.errstate(divide="ignore"):
        return logsumexp(-f / rho, b=a, axis=-1)


def _lambda(f, a, g, b, rho1, rho2):
    la = _log_integral(f, a, rho1)
    lb = _log_integral(g, b, rho2)
    return (rho1 * rho2 / (rho1 + rho2)) * (la - lb)


def _check_positive_mass(a, b):
    if np.any(np.sum(a, axis=-1) <= 0) or np.any(np.sum(b, axis=-1) <= 0):
        raise MeasureError("translation undefined for a zero-mass measure")


def lambda_star(f, g, alpha, beta, rho1: float, rho2: float) -> float:
    """Optimal translation ``lam`` of ``(f + lam, g - lam)`` in the KL dual.

    Parameters
    ----------
    f, g : array-like
        Potentials on the atoms of ``alpha`` and ``beta``.
    alpha, beta : DiscreteMeasure, Measure1D or weight arrays
    rho1, rho2 : float
        KL strengths of the two marginal penalties.
    """
    a, b = _weights(alpha), _weights(beta)
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != a.shape or g.shape != b.shape:
        raise ValueError("potentials must match the atom counts of the measures")
    _check_positive_mass(a, b)
    return float(_lambda(f, a, g, b, rho1, rho2))


def _exp_factor(x, rho):
    return np.exp(np.clip(-x / rho, -EXP_CLAMP, EXP_CLAMP))


def _norm_weights(a, b, f, g, rho1, rho2, lam=None):
    if lam is None:
        lam = _lambda(f, a, g, b, rho1, rho2)
    lam_b = np.asarray(lam)[..., None]
    return a * _exp_factor(f + lam_b, rho1), b * _exp_factor(g - lam_b, rho2), lam


def norm(alpha, beta, f, g, rho1: float, rho2: float):
    """Reweight ``alpha`` by ``exp(-(f + lam)/rho1)`` and ``beta`` by ``exp(-(g - lam)/rho2)``.

    With ``lam`` the optimal translation both outputs carry the same mass.
    Inputs may be :class:`DiscreteMeasure` or :class:`Measure1D`; the output
    pair has the same types and supports.
    """
    lam = lambda_star(f, g, alpha, beta, rho1, rho2)
    a, b = _weights(alpha), _weights(beta)
    wa, wb, _ = _norm_weights(a, b, np.asarray(f, float), np.asarray(g, float), rho1, rho2, lam)
    return dataclasses.replace(alpha, weights=wa), dataclasses.replace(beta, weights=wb)


def fw_step(f, g, r, s, t: int):
    """Convex step towards the oracle potentials with ``gamma = 2 / (t + 3)``."""
    f, g, r, s = (np.asarray(v, dtype=float) for v in (f, g, r, s))
    if f.shape != r.shape or g.shape != s.shape:
        raise ValueError("oracle potentials do not match the iterate's shape")
    gamma = 2.0 / (2.0 + t + 1.0)
    return (1.0 - gamma) * f + gamma * r, (1.0 - gamma) * g + gamma * s


def dual_value(f, g, a, b, lam, params: UnbalancedParams):
    """Dual objective at ``(f + lam, g - lam)``, one value per leading index."""
    lam_b = np.asarray(lam)[..., None]
    return (np.sum(phi_circ(params.div1, f + lam_b) * a, axis=-1)
            + np.sum(phi_circ(params.div2, g - lam_b) * b, axis=-1))


def _stalled(trace, tol):
    return tol is not None and len(trace) > 1 and trace[-1] - trace[-2] < tol


def fw_slices(x, a, y, b, params: UnbalancedParams):
    """Run independent FW ascents on K sorted 1D problems sharing a schedule.

    ``x, a`` (K, n) and ``y, b`` (K, m) are sorted positions and weights.
    Returns per-slice values (K,), sorted-order potentials, the final
    translations and the trace of slice-averaged values.
    """
    params.require_smooth()
    r1, r2 = params.rho1, params.rho2
    _check_positive_mass(a, b)
    f = np.zeros_like(x)
    g = np.zeros_like(y)
    lam = _lambda(f, a, g, b, r1, r2)
    trace = []
    vals = dual_value(f, g, a, b, lam, params)
    for t in range(params.fw_iters):
        abar, bbar, _ = _norm_weights(a, b, f, g, r1, r2, lam)
        _, r, s = nw_batch(x, abar, y, bbar, params.p)
        f, g = fw_step(f, g, r, s, t)
        lam = _lambda(f, a, g, b, r1, r2)
        vals = dual_value(f, g, a, b, lam, params)
        trace.append(float(np.mean(vals)))
        if _stalled(trace, params.fw_tol):
            break
    return vals, f, g, lam, trace


def uot1d(mu: Measure1D, nu: Measure1D, params: UnbalancedParams):
    """KL-relaxed unbalanced OT between two measures on the line.

    Returns the dual value and the recentred potentials ``(f + lam, g - lam)``
    in the atom order of ``mu`` and ``nu``.
    """
    params.require_smooth()
    smu = mu if mu.sorted else mu.sort()
    snu = nu if nu.sorted else nu.sort()
    vals, f, g, lam, _ = fw_slices(smu.positions[None], smu.weights[None],
                                   snu.positions[None], snu.weights[None], params)
    fo = np.empty_like(f[0])
    go = np.empty_like(g[0])
    fo[_order(mu, smu)] = f[0] + lam[0]
    go[_order(nu, snu)] = g[0] - lam[0]
    return float(vals[0]), DualPotentials(fo, go)


def _order(orig: Measure1D, srt: Measure1D):
    if orig is srt:
        return np.arange(orig.weights.shape[0])
    pos_of = np.empty_like(orig.perm)
    pos_of[orig.perm] = np.arange(orig.perm.shape[0])
    return pos_of[srt.perm]
