import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from uslice import DiscreteMeasure, Measure1D, MeasureError, mass, normalize_to_probability, reweight
from uslice.measures import check_solver_input


def test_mass_examples():
    assert mass(DiscreteMeasure([[0.0], [1.0]], [0.5, 0.5])) == 1.0
    assert mass(DiscreteMeasure(np.zeros((3, 2)), [1, 2, 3])) == 6.0
    assert mass(DiscreteMeasure([[4.0, 2.0]], [0.25])) == 0.25


def test_one_dimensional_points_become_a_column():
    m = DiscreteMeasure([0.0, 1.0, 2.0], [1, 1, 1])
    assert m.points.shape == (3, 1) and m.dim == 1 and len(m) == 3


@pytest.mark.parametrize("points,weights", [
    ([[0.0], [1.0]], [1.0]),
    ([[0.0], [np.nan]], [1.0, 1.0]),
    ([[0.0], [np.inf]], [1.0, 1.0]),
    ([[0.0], [1.0]], [1.0, -0.5]),
    ([[0.0], [1.0]], [1.0, np.nan]),
    (np.zeros((0, 2)), []),
])
def test_invalid_measures_rejected(points, weights):
    with pytest.raises(MeasureError):
        DiscreteMeasure(points, weights)


def test_measure_is_read_only():
    m = DiscreteMeasure([[0.0], [1.0]], [1.0, 2.0])
    with pytest.raises(ValueError):
        m.weights[0] = 3.0


def test_reweight_examples():
    m = DiscreteMeasure([[0.0], [1.0]], [1.0, 1.0])
    assert np.array_equal(reweight(m, [1, 1]).weights, m.weights)
    z = reweight(m, [0, 0])
    assert mass(z) == 0.0
    with pytest.raises(MeasureError):
        check_solver_input(z)
    assert np.array_equal(reweight(m, [2, 0.5]).weights, [2.0, 0.5])


@pytest.mark.parametrize("factors", [[1.0, -1.0], [1.0, np.inf], [1.0, np.nan], [1.0]])
def test_reweight_rejects_bad_factors(factors):
    m = DiscreteMeasure([[0.0], [1.0]], [1.0, 1.0])
    with pytest.raises(MeasureError):
        reweight(m, factors)


def test_normalize_examples():
    pts = [[0.0], [1.0]]
    assert np.allclose(normalize_to_probability(DiscreteMeasure(pts, [2, 2])).weights, [0.5, 0.5])
    assert np.allclose(normalize_to_probability(DiscreteMeasure([[0.0]], [1])).weights, [1.0])
    assert np.allclose(normalize_to_probability(DiscreteMeasure(pts, [3, 1])).weights, [0.75, 0.25])
    with pytest.raises(MeasureError):
        normalize_to_probability(DiscreteMeasure(pts, [0, 0]))


weights = arrays(np.float64, st.integers(1, 30), elements=st.floats(0, 1e3))


@settings(max_examples=200, deadline=None)
@given(w=weights, data=st.data())
def test_reweight_mass_identity(w, data):
    f = data.draw(arrays(np.float64, w.shape[0], elements=st.floats(0, 1e3)))
    m = DiscreteMeasure(np.zeros((w.shape[0], 1)), w)
    expected = float(np.sum(w * f))
    assert abs(mass(reweight(m, f)) - expected) <= 1e-12 * max(1.0, expected)


@settings(max_examples=200, deadline=None)
@given(w=weights)
def test_normalize_gives_unit_mass(w):
    if w.sum() <= 0:
        return
    m = normalize_to_probability(DiscreteMeasure(np.zeros((w.shape[0], 2)), w))
    assert abs(mass(m) - 1.0) <= 1e-12


def test_measure1d_sort_tracks_permutation():
    mu = Measure1D([3.0, 1.0, 2.0, 1.0], [0.1, 0.2, 0.3, 0.4])
    s = mu.sort()
    assert s.sorted and np.array_equal(s.positions, [1, 1, 2, 3])
    # stable: the two atoms at 1.0 keep their input order
    assert np.array_equal(s.perm, [1, 3, 2, 0])
    assert np.array_equal(s.weights, mu.weights[s.perm])
    with pytest.raises(MeasureError):
        Measure1D([1.0, 0.0], [1, 1], sorted=True)
