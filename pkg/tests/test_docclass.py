import numpy as np
import pytest

from uslice import UnbalancedParams
from uslice.docclass import classify, distance_matrix, pair_seed
from uslice.io import FormatError
from uslice.toy import separable_corpus

from conftest import random_measure


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    labels = separable_corpus(root)
    return root / "docs", labels


def test_pair_seed_is_order_free():
    assert pair_seed(3, 1, 7) == pair_seed(3, 7, 1)
    assert pair_seed(3, 1, 7) != pair_seed(3, 1, 8)


def test_separable_classes(corpus):
    res = classify(*corpus, "usot", UnbalancedParams.kl(1.0, n_projections=50, fw_iters=10), k=1)
    assert res.accuracy == 1.0 and res.n_docs == 20
    D = res.matrix
    assert np.max(np.abs(np.diag(D))) <= 1e-9
    assert np.max(np.abs(D - D.T)) <= 1e-8


@pytest.mark.parametrize("mode", ["sot", "suot", "usot-stochastic"])
def test_other_modes(corpus, mode):
    res = classify(*corpus, mode, UnbalancedParams.kl(1.0, n_projections=20, fw_iters=5), k=3)
    assert res.accuracy == 1.0


def test_matrix_is_thread_count_independent(rng):
    ms = [random_measure(rng, 6, 3, mass=rng.uniform(0.5, 2)) for _ in range(4)]
    p = UnbalancedParams.kl(1.0, 2.0, n_projections=10, fw_iters=5)
    d1 = distance_matrix(ms, "usot", p, workers=1)
    d3 = distance_matrix(ms, "usot", p, workers=3)
    assert d1.tobytes() == d3.tobytes()


def test_missing_document(tmp_path):
    separable_corpus(tmp_path, n_docs=4)
    (tmp_path / "docs" / "doc000.csv").unlink()
    with pytest.raises(FormatError):
        classify(tmp_path / "docs", tmp_path / "labels.csv", "usot", UnbalancedParams.kl())
