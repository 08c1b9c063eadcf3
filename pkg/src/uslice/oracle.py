"""Reference solvers used to validate the fast path.

Nothing here imports the Frank-Wolfe or 1D closed-form code: the dense LP
and the entropic unbalanced Sinkhorn are independent routes to the same
quantities.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog
from scipy.special import logsumexp

from .divergences import SolverError

LP_SIZE_CAP = 10_000
SINKHORN_SIZE_CAP = 1_000_000
_CLAMP = 700.0


class OracleSizeError(ValueError):
    pass


class SinkhornNonConvergence(SolverError):
    pass


def cost_matrix(x, y, p: float = 2.0):
    """Dense ``|x_i - y_j|^p`` (Euclidean norm for points in R^d)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if y.ndim == 1:
        y = y[:, None]
    d = np.sqrt(np.maximum(np.sum((x[:, None, :] - y[None, :, :]) ** 2, axis=-1), 0.0))
    return d ** p


@dataclass
class LPResult:
    value: float
    plan: np.ndarray
    f: np.ndarray | None = None
    g: np.ndarray | None = None


def _vertex_enumeration(a, b, C):
    # every vertex of the transportation polytope is a basic solution on
    # n + m - 1 cells; solve every basis at once and keep the cheapest
    # feasible one
    n, m = C.shape
    A = np.zeros((n + m, n * m))
    for k in range(n * m):
        A[k // m, k] = 1.0
        A[n + k % m, k] = 1.0
    rhs = np.concatenate([a, b])[:-1]
    supports = np.array(list(itertools.combinations(range(n * m), n + m - 1)), dtype=np.intp)
    # one marginal constraint is implied by the others
    blocks = np.transpose(A[:-1][:, supports], (1, 0, 2))
    # the constraint matrix is totally unimodular: bases have det +-1
    basis = np.abs(np.linalg.det(blocks)) > 0.5
    supports, blocks = supports[basis], blocks[basis]
    sol = np.linalg.solve(blocks, np.broadcast_to(rhs, (len(blocks), rhs.size))[..., None])[..., 0]
    ok = np.all(sol >= -1e-12, axis=1)
    sol = np.maximum(sol[ok], 0.0)
    supports = supports[ok]
    vals = np.sum(sol * C.ravel()[supports], axis=1)
    k = int(np.argmin(vals))
    plan = np.zeros(n * m)
    plan[supports[k]] = sol[k]
    return LPResult(float(vals[k]), plan.reshape(n, m))


def lp_ot(a, b, C, method: str = "auto") -> LPResult:
    """Exact balanced OT by linear programming.

    Parameters
    ----------
    a, b : array-like
        Marginal weights with equal totals (up to rounding).
    C : array-like, shape (n, m)
        Cost matrix.
    method : {"auto", "simplex", "enumerate"}
        ``enumerate`` brute-forces every basic solution and is allowed only
        for n, m <= 4. ``auto`` uses it there and the HiGHS dual simplex
        otherwise.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    C = np.asarray(C, dtype=float)
    n, m = C.shape
    if n * m > LP_SIZE_CAP:
        raise OracleSizeError(f"LP oracle capped at {LP_SIZE_CAP} cells, got {n * m}")
    if abs(a.sum() - b.sum()) > 1e-9 * max(1.0, a.sum()):
        raise SolverError("balanced oracle called on unbalanced inputs")
    if method == "enumerate" or (method == "auto" and n <= 4 and m <= 4):
        if n > 4 or m > 4:
            raise OracleSizeError("vertex enumeration is limited to n, m <= 4")
        return _vertex_enumeration(a, b, C)
    rows = np.concatenate([np.repeat(np.arange(n), m), n + np.tile(np.arange(m), n)])
    cols = np.concatenate([np.arange(n * m), np.arange(n * m)])
    A = sp.csr_matrix((np.ones(2 * n * m), (rows, cols)), shape=(n + m, n * m))
    # the last marginal constraint is implied by the others
    res = linprog(C.ravel(), A_eq=A[:-1], b_eq=np.concatenate([a, b])[:-1],
                  bounds=(0, None), method="highs-ds")
    if res.status != 0:
        raise SolverError(f"LP oracle failed: {res.message}")
    plan = res.x.reshape(n, m)
    duals = np.concatenate([res.eqlin.marginals, [0.0]])
    return LPResult(float(np.dot(res.x, C.ravel())), plan, duals[:n], duals[n:])


def lp_ot_1d(mu, nu, p: float = 2.0) -> float:
    """LP value between two measures on R (anything with positions/weights)."""
    return lp_ot(mu.weights, nu.weights, cost_matrix(mu.positions, nu.positions, p)).value


@dataclass
class SinkhornResult:
    value: float
    entropy: float
    transport: float
    kl1: float
    kl2: float
    plan: np.ndarray
    f: np.ndarray
    g: np.ndarray
    epsilon: float
    iterations: int
    residual: float


def _kl(pi, ref):
    pos = pi > 0
    out = np.sum(ref[~pos])
    out += np.sum(pi[pos] * np.log(pi[pos] / ref[pos]) - pi[pos] + ref[pos])
    return float(max(out, 0.0))


def _softmin_rows(h, eps, logw):
    # -eps log sum_j w_j exp(h_ij / eps), taken along axis 1
    return -eps * logsumexp(h / eps + logw[None, :], axis=1)


def _entropic_dual(f, g, a, b, la, lb, C, eps, rho1, rho2):
    logpi = (f[:, None] + g[None, :] - C) / eps + la[:, None] + lb[None, :]
    pi = np.exp(np.minimum(logpi, _CLAMP))
    val = (np.dot(a, -rho1 * np.expm1(np.clip(-f / rho1, -_CLAMP, _CLAMP)))
           + np.dot(b, -rho2 * np.expm1(np.clip(-g / rho2, -_CLAMP, _CLAMP)))
           - eps * (pi.sum() - a.sum() * b.sum()))
    return val, pi


def _newton_polish(f, g, a, b, la, lb, C, eps, rho1, rho2, iters=30):
    """Damped Newton ascent on the entropic dual, restricted to atoms of positive mass."""
    ia, ib = a > 0, b > 0
    n = int(ia.sum())
    Cs = C[np.ix_(ia, ib)]
    args = (a[ia], b[ib], la[ia], lb[ib], Cs, eps, rho1, rho2)
    fs, gs = f[ia].copy(), g[ib].copy()
    val, pi = _entropic_dual(fs, gs, *args)
    for _ in range(iters):
        e1 = a[ia] * np.exp(np.clip(-fs / rho1, -_CLAMP, _CLAMP))
        e2 = b[ib] * np.exp(np.clip(-gs / rho2, -_CLAMP, _CLAMP))
        p1, p2 = pi.sum(axis=1), pi.sum(axis=0)
        grad = np.concatenate([e1 - p1, e2 - p2])
        H = np.block([[np.diag(-e1 / rho1 - p1 / eps), -pi / eps],
                      [-pi.T / eps, np.diag(-e2 / rho2 - p2 / eps)]])
        try:
            step = np.linalg.solve(H, -grad)
        except np.linalg.LinAlgError:
            break
        t = 1.0
        slope = float(np.dot(grad, step))
        while t > 1e-10:
            fn, gn = fs + t * step[:n], gs + t * step[n:]
            new_val, new_pi = _entropic_dual(fn, gn, *args)
            if new_val >= val + 1e-4 * t * slope:
                break
            t /= 2
        else:
            break
        fs, gs, val, pi = fn, gn, new_val, new_pi
        if np.max(np.abs(t * step)) < 1e-13 * (1.0 + np.max(np.abs(fs))):
            break
    f, g = f.copy(), g.copy()
    f[ia], g[ib] = fs, gs
    return f, g


def sinkhorn_uot(a, b, C, rho1: float, rho2: float, epsilon: float | None = None,
                 max_iters: int = 100_000, tol: float = 1e-10,
                 translate: bool = True, newton_every: int | None = 50) -> SinkhornResult:
    """Entropic unbalanced OT with ``rho KL`` marginal penalties.

    Log-domain Sinkhorn on the dual, with epsilon annealing: the
    regularization starts at the mean cost and is halved until it reaches
    ``epsilon`` (default ``1e-3 * mean(C)``), warm-starting each stage.
    With ``translate`` each sweep is followed by the exact maximization of
    the dual along ``(f + t, g - t)``, which the entropic term does not see.

    When ``rho / eps`` is large the sweeps contract slowly; every
    ``newton_every`` sweeps without convergence a damped Newton polish is
    applied to the same entropic dual. Convergence is always judged on the
    Sinkhorn fixed-point residual (sup-norm change of the potentials over
    one sweep), against ``tol * mean(C)``.

    The reported ``value`` is the unregularized primal objective
    ``<pi, C> + rho1 KL(pi_1|a) + rho2 KL(pi_2|b)`` at the entropic plan, an
    upper bound on UOT; ``entropy`` is ``eps KL(pi | a x b)``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    C = np.asarray(C, dtype=float)
    n, m = C.shape
    if n * m > SINKHORN_SIZE_CAP:
        raise OracleSizeError(f"dense cost of {n * m} entries exceeds the oracle cap")
    scale = float(np.mean(C)) if np.mean(C) > 0 else 1.0
    target = 1e-3 * scale if epsilon is None else float(epsilon)
    if not target > 0:
        raise ValueError("epsilon must be > 0")
    with np.errstate(divide="ignore"):
        la, lb = np.log(a), np.log(b)
    k1 = rho1 * rho2 / (rho1 + rho2)
    f = np.zeros(n)
    g = np.zeros(m)

    schedule = []
    eps = max(scale, target)
    while eps > target:
        schedule.append(eps)
        eps /= 2
    schedule.append(target)

    total_iters = 0
    residual = math.inf
    for stage, eps in enumerate(schedule):
        last = stage == len(schedule) - 1
        stage_tol = tol * scale if last else max(tol * scale, 1e-6 * eps)
        converged = False
        for sweep in range(1, max_iters + 1):
            f_old, g_old = f, g
            f = rho1 / (rho1 + eps) * _softmin_rows(g[None, :] - C, eps, lb)
            g = rho2 / (rho2 + eps) * _softmin_rows((f[:, None] - C).T, eps, la)
            if translate:
                num = logsumexp(np.clip(-f / rho1, -_CLAMP, _CLAMP), b=a)
                den = logsumexp(np.clip(-g / rho2, -_CLAMP, _CLAMP), b=b)
                shift = k1 * (num - den)
                f, g = f + shift, g - shift
            total_iters += 1
            residual = max(np.max(np.abs(f - f_old)), np.max(np.abs(g - g_old)))
            if residual < stage_tol:
                converged = True
                break
            if newton_every and sweep % newton_every == 0:
                f, g = _newton_polish(f, g, a, b, la, lb, C, eps, rho1, rho2)
        if last and not converged:
            raise SinkhornNonConvergence(
                f"sinkhorn_uot did not converge in {max_iters} iterations at "
                f"eps={eps:.3e}: residual {residual:.3e} > {stage_tol:.3e}")

    eps = schedule[-1]
    logpi = (f[:, None] + g[None, :] - C) / eps + la[:, None] + lb[None, :]
    plan = np.exp(np.clip(logpi, -np.inf, _CLAMP))
    transport = float(np.sum(plan * C))
    kl1 = rho1 * _kl(plan.sum(axis=1), a)
    kl2 = rho2 * _kl(plan.sum(axis=0), b)
    entropy = eps * _kl(plan.ravel(), np.outer(a, b).ravel())
    return SinkhornResult(transport + kl1 + kl2, entropy, transport, kl1, kl2,
                          plan, f, g, eps, total_iters, float(residual))


def marginal_residual(res: SinkhornResult, a, b, rho1: float, rho2: float) -> float:
    """Largest relative violation of ``pi_1 = a e^{-f/rho1}``, ``pi_2 = b e^{-g/rho2}``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    r1 = res.plan.sum(axis=1) - a * np.exp(-res.f / rho1)
    r2 = res.plan.sum(axis=0) - b * np.exp(-res.g / rho2)
    return float(max(np.max(np.abs(r1)), np.max(np.abs(r2))) / max(a.sum(), b.sum()))
