import math

import mpmath as mp
import numpy as np
import pytest

from uslice import (DiscreteMeasure, DivergenceSpec, Kind, Measure1D, SolverError, UnbalancedParams,
                    fw_step, lambda_star, mass, norm, phi_circ, uot1d)
from uslice.fw import fw_slices
from uslice.oracle import cost_matrix, sinkhorn_uot

# 5-vs-7 atom instance; reference from the entropic oracle at eps = 1e-5 mean(C)
X5 = np.array([0.625, 0.897, 0.776, 0.225, 0.3])
A5 = np.array([1.074, 0.205, 1.021, 0.997, 0.668])
Y7 = np.array([0.303, 0.278, 0.255, 0.445, 0.505, 0.553, 0.996])
B7 = np.array([0.893, 0.722, 1.089, 0.315, 0.26, 0.713, 0.144])
ORACLE_5_7 = 0.1601106080219667


def _golden(fun, lo, hi, tol=1e-11):
    # the dual is concave in the translation, so golden-section search is exact enough
    r = (math.sqrt(5) - 1) / 2
    c, d = hi - r * (hi - lo), lo + r * (hi - lo)
    while hi - lo > tol:
        if fun(c) < fun(d):
            hi, d = d, c
            c = hi - r * (hi - lo)
        else:
            lo, c = c, d
            d = lo + r * (hi - lo)
    return 0.5 * (lo + hi)


def test_lambda_star_examples():
    a = DiscreteMeasure([[0.0], [1.0]], [1.0, 2.0])
    b = DiscreteMeasure([[0.0], [1.0], [2.0]], [1.0, 1.0, 1.0])
    assert lambda_star(np.zeros(2), np.zeros(3), a, b, 0.3, 7.0) == 0.0
    e = DiscreteMeasure([[0.0]], [math.e])
    one = DiscreteMeasure([[0.0]], [1.0])
    assert lambda_star([0.0], [0.0], e, one, 1.0, 1.0) == pytest.approx(0.5, abs=1e-15)


def test_lambda_star_against_scalar_search(rng):
    a = rng.random(5) + 0.1
    b = rng.random(5) + 0.1
    f = rng.normal(size=5)
    g = rng.normal(size=5)
    mp.mp.dps = 40

    # double precision only pins the argmax of a flat maximum to ~1e-8
    def neg(lam):
        lam = mp.mpf(lam)
        return -(sum(w * 2 * (1 - mp.exp(-(mp.mpf(x) + lam) / 2)) for x, w in zip(f, a))
                 + sum(w * 3 * (1 - mp.exp(-(mp.mpf(y) - lam) / 3)) for y, w in zip(g, b)))

    assert lambda_star(f, g, a, b, 2.0, 3.0) == pytest.approx(_golden(neg, -20.0, 20.0), abs=1e-8)


def test_lambda_star_first_order_condition(rng):
    for _ in range(50):
        a = rng.random(6) * rng.choice([1e-3, 1, 1e3])
        b = rng.random(8)
        f = rng.normal(size=6) * 5
        g = rng.normal(size=8) * 5
        r1, r2 = rng.uniform(0.05, 20, 2)
        lam = lambda_star(f, g, a, b, r1, r2)
        lhs = np.sum(a * np.exp(-(f + lam) / r1))
        rhs = np.sum(b * np.exp(-(g - lam) / r2))
        assert abs(lhs - rhs) <= 1e-9 * rhs


def test_lambda_star_zero_weights_and_errors():
    # zero-weight atoms must not influence the translation
    assert lambda_star([0.0, -1e6], [0.0], [1.0, 0.0], [1.0], 1.0, 1.0) == 0.0
    with pytest.raises(ValueError):
        lambda_star([0.0], [0.0], [0.0], [1.0], 1.0, 1.0)
    with pytest.raises(ValueError):
        lambda_star([0.0, 1.0], [0.0], [1.0], [1.0], 1.0, 1.0)


def test_norm_examples(rng):
    a = DiscreteMeasure(rng.random((3, 2)), [0.5, 0.25, 0.25])
    b = DiscreteMeasure(rng.random((2, 2)), [0.5, 0.5])
    na, nb = norm(a, b, np.zeros(3), np.zeros(2), 1.0, 1.0)
    assert np.array_equal(na.weights, a.weights) and np.array_equal(nb.weights, b.weights)
    a4 = DiscreteMeasure([[0.0]], [4.0])
    b1 = DiscreteMeasure([[1.0]], [1.0])
    for rho in (0.5, 1.0, 9.0):
        na, nb = norm(a4, b1, [0.0], [0.0], rho, rho)
        assert mass(na) == pytest.approx(2.0, rel=1e-12) and mass(nb) == pytest.approx(2.0, rel=1e-12)


def test_norm_masses_agree(rng):
    for _ in range(50):
        a = Measure1D(rng.random(7), rng.random(7) * 10)
        b = Measure1D(rng.random(4), rng.random(4))
        f, g = rng.normal(size=7) * 3, rng.normal(size=4) * 3
        na, nb = norm(a, b, f, g, *rng.uniform(0.1, 5, 2))
        assert abs(na.mass() - nb.mass()) <= 1e-9 * (1 + na.mass())


def test_fw_step_examples():
    f, g, r, s = np.array([3.0]), np.array([1.0]), np.array([0.0]), np.array([4.0])
    f1, g1 = fw_step(f, g, r, s, 0)
    assert f1 == pytest.approx(1.0) and g1 == pytest.approx(1 / 3 + 8 / 3)
    assert np.array_equal(fw_step(f, g, f, g, 5)[0], f)
    f_big, _ = fw_step(f, g, r, s, 10**12)
    assert f_big == pytest.approx(f, rel=1e-11)
    with pytest.raises(ValueError):
        fw_step(np.zeros(2), g, np.zeros(3), s, 0)


def test_uot1d_identical_measures():
    mu = Measure1D([0.0, 1.0, 3.0], [0.2, 0.3, 0.5])
    val, pots = uot1d(mu, mu, UnbalancedParams.kl(1.0))
    assert abs(val) <= 1e-9
    assert np.all(pots.f == 0) and np.all(pots.g == 0)


@pytest.mark.parametrize("b", [0.25, 1.0, 4.0, 9.0])
@pytest.mark.parametrize("rho", [0.5, 2.0])
def test_uot1d_mass_only(b, rho):
    val, _ = uot1d(Measure1D([0.0], [1.0]), Measure1D([0.0], [b]), UnbalancedParams.kl(rho))
    assert val == pytest.approx(rho * (1 - np.sqrt(b)) ** 2, abs=1e-12)
    o = sinkhorn_uot([1.0], [b], [[0.0]], rho, rho)
    assert abs(val - o.value) <= 1e-3 * (1 + val)


def test_uot1d_matches_frozen_oracle():
    val, pots = uot1d(Measure1D(X5, A5), Measure1D(Y7, B7), UnbalancedParams.kl(1.0, fw_iters=200))
    assert abs(val - ORACLE_5_7) <= 1e-3 * ORACLE_5_7
    C = cost_matrix(X5, Y7, 2)
    assert np.all(pots.f[:, None] + pots.g[None, :] <= C + 1e-9)


def test_frozen_oracle_value_reproduces():
    C = cost_matrix(X5, Y7, 2)
    r = sinkhorn_uot(A5, B7, C, 1.0, 1.0, epsilon=1e-5 * C.mean())
    assert r.value == pytest.approx(ORACLE_5_7, rel=1e-9)


def test_uot1d_rejects_non_smooth():
    mu = Measure1D([0.0], [1.0])
    for kind in (Kind.TV, Kind.BALANCED):
        p = UnbalancedParams(DivergenceSpec(kind, 1.0), DivergenceSpec(Kind.KL, 1.0))
        with pytest.raises(SolverError, match="FW requires smooth"):
            uot1d(mu, mu, p)


def test_endpoint_ascent_and_mass_bound(rng):
    for _ in range(10):
        n, m = rng.integers(2, 10, 2)
        x, y = np.sort(rng.random(n)), np.sort(rng.random(m))
        a, b = rng.random(n) + 0.1, (rng.random(m) + 0.1) * rng.uniform(0.3, 3)
        rho = rng.uniform(0.3, 3)
        *_, trace = fw_slices(x[None], a[None], y[None], b[None], UnbalancedParams.kl(rho, fw_iters=200))
        assert trace[199] >= trace[4] - 1e-9
        assert trace[-1] >= rho * (np.sqrt(a.sum()) - np.sqrt(b.sum())) ** 2 - 1e-9


def test_fw_tol_stops_early():
    p = UnbalancedParams.kl(1.0, fw_iters=1000, fw_tol=1e-6)
    *_, trace = fw_slices(np.array([[0.0, 1.0]]), np.array([[1.0, 1.0]]),
                          np.array([[0.5]]), np.array([[1.5]]), p)
    assert len(trace) < 1000
