"""Small synthetic inputs: the outlier toy and separable document classes."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .io import write_point_cloud
from .measures import DiscreteMeasure

DATA_DIR = Path(__file__).with_name("data")


def outlier_toy(seed: int = 0, n: int = 50, scale: float = 0.1, outlier_mass: float = 0.05):
    """Two 2D Gaussian clusters; ``alpha`` also has one far outlier.

    The clusters have standard deviation ``scale`` and centres ``scale``
    apart. The outlier sits ``10 * scale`` away from alpha's centre and is
    the LAST atom of alpha, with weight ``outlier_mass``; both measures have
    unit mass.
    """
    rng = np.random.default_rng(seed)
    xa = rng.normal(0.0, scale, (n, 2))
    xb = rng.normal(0.0, scale, (n, 2)) + [scale, 0.0]
    pts = np.vstack([xa, [[0.0, 10.0 * scale]]])
    wa = np.append(np.full(n, (1.0 - outlier_mass) / n), outlier_mass)
    return DiscreteMeasure(pts, wa), DiscreteMeasure(xb, np.full(n, 1.0 / n))


def separable_corpus(out_dir, n_docs: int = 20, dim: int = 5, words: int = 12,
                     gap: float = 10.0, seed: int = 0):
    """Write a two-class toy corpus for the docclass pipeline.

    Each document is a cloud of ``words`` embedded words with random
    frequency weights; class 1 clouds are shifted by ``gap`` along the first
    axis. Every other document of each class goes to the test split.
    Returns the path of the labels file.
    """
    out_dir = Path(out_dir)
    docs = out_dir / "docs"
    docs.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    lines = ["doc_id,label,split"]
    for k in range(n_docs):
        label = k % 2
        x = rng.normal(size=(words, dim))
        x[:, 0] += gap * label
        counts = rng.integers(1, 6, words).astype(float)
        doc_id = f"doc{k:03d}"
        write_point_cloud(docs / f"{doc_id}.csv", x, counts / counts.sum())
        split = "test" if (k // 2) % 2 else "train"
        lines.append(f"{doc_id},class{label},{split}")
    labels = out_dir / "labels.csv"
    labels.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return labels
