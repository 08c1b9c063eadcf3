"""Pairwise transport distances between documents and k-NN classification."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from sklearn.neighbors import KNeighborsClassifier

from .divergences import UnbalancedParams
from .io import FormatError, read_labels, read_point_cloud
from .measures import normalize_to_probability
from .ot1d import sliced_ot_loss
from .slicing import sample_directions
from .suot import suot
from .usot import usot, usot_stochastic

MODES = ("sot", "suot", "usot", "usot-stochastic")


def pair_seed(seed: int, i: int, j: int) -> int:
    """Seed for the pair ``{i, j}``; the same for both orders."""
    lo, hi = min(i, j), max(i, j)
    return int(np.random.SeedSequence([seed, lo, hi]).generate_state(1, np.uint64)[0])


def distance(alpha, beta, mode: str, params: UnbalancedParams) -> float:
    """One transport value between two measures with the directions in ``params``."""
    if mode == "sot":
        dirs = sample_directions(alpha.dim, params.n_projections, params.seed)
        return sliced_ot_loss(alpha, beta, dirs, params.p)
    if mode == "suot":
        return suot(alpha, beta, None, params)[0]
    if mode == "usot":
        return usot(alpha, beta, None, params)[0]
    if mode == "usot-stochastic":
        return usot_stochastic(alpha, beta, params)[0]
    raise ValueError(f"unknown mode {mode!r}")


def thread_count() -> int:
    env = os.environ.get("USLICE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def distance_matrix(measures, mode: str, params: UnbalancedParams, workers: int | None = None):
    """All ordered pairs, each pair using directions seeded by :func:`pair_seed`.

    Both orders of a pair share their directions, so for ``rho1 == rho2``
    the matrix is symmetric up to rounding.
    """
    n = len(measures)
    if mode == "sot":
        measures = [normalize_to_probability(m) for m in measures]
    out = np.zeros((n, n))

    def job(ij):
        i, j = ij
        pr = _with_seed(params, pair_seed(params.seed, i, j))
        return ij, distance(measures[i], measures[j], mode, pr)

    pairs = [(i, j) for i in range(n) for j in range(n)]
    with ThreadPoolExecutor(max_workers=workers or thread_count()) as ex:
        for (i, j), v in ex.map(job, pairs):
            out[i, j] = v
    return out


def _with_seed(params, seed):
    return replace(params, seed=seed)


@dataclass
class DocclassResult:
    accuracy: float
    k: int
    mode: str
    n_docs: int
    doc_ids: list
    matrix: np.ndarray

    def report(self) -> dict:
        return {"accuracy": self.accuracy, "k": self.k, "mode": self.mode, "n_docs": self.n_docs}


def load_corpus(doc_dir, labels_path):
    """Documents named in the labels file, read from ``doc_dir/<doc_id>.csv``."""
    entries = read_labels(labels_path)
    doc_dir = Path(doc_dir)
    docs = []
    for doc_id, label, split in entries:
        if not doc_id or not label:
            raise FormatError(f"{labels_path}: empty doc_id or label")
        docs.append((doc_id, label, split, read_point_cloud(doc_dir / f"{doc_id}.csv")))
    return docs


def classify(doc_dir, labels_path, mode: str, params: UnbalancedParams, k: int = 1,
             workers: int | None = None) -> DocclassResult:
    docs = load_corpus(doc_dir, labels_path)
    train = [i for i, d in enumerate(docs) if d[2] == "train"]
    test = [i for i, d in enumerate(docs) if d[2] == "test"]
    if not train or not test:
        raise FormatError("labels must put at least one document in each of train and test")
    if k > len(train):
        raise FormatError(f"k={k} exceeds the {len(train)} training documents")
    dims = {d[3].dim for d in docs}
    if len(dims) > 1:
        raise FormatError(f"documents live in different dimensions {sorted(dims)}")
    D = distance_matrix([d[3] for d in docs], mode, params, workers)
    labels = np.array([d[1] for d in docs])
    knn = KNeighborsClassifier(n_neighbors=k, metric="precomputed")
    # transport values can be a hair below zero after rounding
    knn.fit(np.maximum(D[np.ix_(train, train)], 0.0), labels[train])
    pred = knn.predict(np.maximum(D[np.ix_(test, train)], 0.0))
    acc = float(np.mean(pred == labels[test]))
    return DocclassResult(acc, k, mode, len(docs), [d[0] for d in docs], D)
