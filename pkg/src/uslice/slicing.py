"""Random directions on the unit sphere and projections onto them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measures import DiscreteMeasure, Measure1D, MeasureError


@dataclass(frozen=True)
class ProjectionSet:
    """``K`` unit directions in R^d, with the seed that produced them."""

    directions: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        th = np.atleast_2d(np.asarray(self.directions, dtype=float))
        norms = np.linalg.norm(th, axis=1)
        if not np.allclose(norms, 1.0, rtol=0, atol=1e-12):
            raise ValueError("projection directions must have unit norm")
        th.setflags(write=False)
        object.__setattr__(self, "directions", th)

    @property
    def K(self) -> int:
        return self.directions.shape[0]

    @property
    def dim(self) -> int:
        return self.directions.shape[1]

    def __len__(self):
        return self.K


def sample_directions(d: int, K: int, seed: int = 0) -> ProjectionSet:
    """Draw ``K`` i.i.d. directions uniformly on S^{d-1}.

    Rows are ``g / |g|`` with ``g`` a standard normal d-vector drawn from
    ``numpy.random.default_rng(seed)`` (PCG64), all K*d normals in one
    row-major call. The output is a pure function of ``(d, K, seed)``.
    """
    if d < 1 or K < 1:
        raise ValueError("need d >= 1 and K >= 1")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((K, d))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    # an exactly-zero Gaussian vector has probability 0; keep output well defined anyway
    bad = norms[:, 0] == 0
    if np.any(bad):
        g[bad] = 0.0
        g[bad, 0] = 1.0
        norms[bad] = 1.0
    th = g / norms
    # one more pass so that the norm is 1 to the last ulp or two
    th /= np.linalg.norm(th, axis=1, keepdims=True)
    return ProjectionSet(th, seed)


def project(m: DiscreteMeasure, theta) -> Measure1D:
    """Push ``m`` forward by ``x -> <theta, x>`` and sort the result.

    The sort is stable, so atoms with equal projections keep input order.
    ``result.perm[k]`` is the original index of the k-th sorted atom.
    """
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.shape[0] != m.dim:
        raise MeasureError(f"direction has dimension {theta.shape[0]}, measure {m.dim}")
    pos = m.points @ theta
    order = np.argsort(pos, kind="stable")
    return Measure1D(pos[order], m.weights[order], sorted=True, perm=order)


def project_all(points: np.ndarray, dirs: ProjectionSet):
    """Sorted projections of a point cloud on every direction at once.

    Returns
    -------
    positions : ndarray, shape (K, n)
        Row k holds the sorted values ``<theta_k, x_i>``.
    perm : ndarray, shape (K, n)
        ``perm[k, j]`` is the original index of ``positions[k, j]``.
    """
    points = np.asarray(points, dtype=float)
    if points.shape[1] != dirs.dim:
        raise MeasureError(f"directions live in R^{dirs.dim}, points in R^{points.shape[1]}")
    proj = dirs.directions @ points.T
    perm = np.argsort(proj, axis=1, kind="stable")
    return np.take_along_axis(proj, perm, axis=1), perm
