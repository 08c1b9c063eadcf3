"""Discrete positive measures on R^d and on the real line."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class MeasureError(ValueError):
    """Raised on malformed measure data (shapes, signs, non-finite values)."""


@dataclass(frozen=True)
class DiscreteMeasure:
    """Weighted point cloud ``sum_i w_i delta_{x_i}`` in R^d.

    Weights need not sum to one. Zero-weight atoms are kept so that potential
    vectors computed by the solvers stay index-aligned with the input.

    Parameters
    ----------
    points : array-like, shape (n, d) or (n,)
        Support locations. A 1-D array is read as n points in R^1.
    weights : array-like, shape (n,)
        Non-negative masses, at least one strictly positive.
    """

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.points, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if x.ndim != 2 or x.shape[1] < 1:
            raise MeasureError(f"points must be an (n, d) array, got shape {x.shape}")
        if x.shape[0] != w.shape[0]:
            raise MeasureError(
                f"{x.shape[0]} points but {w.shape[0]} weights")
        if w.shape[0] == 0:
            raise MeasureError("measure has no atoms")
        if not np.all(np.isfinite(x)):
            raise MeasureError("non-finite coordinate in points")
        if not np.all(np.isfinite(w)):
            raise MeasureError("non-finite weight")
        if np.any(w < 0):
            raise MeasureError("negative weight")
        x.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", x)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def __len__(self):
        return self.n

    def mass(self) -> float:
        return mass(self)


@dataclass(frozen=True)
class Measure1D:
    """Discrete measure on the real line.

    ``perm`` records where each entry came from: ``positions[k]`` is the
    projection of original atom ``perm[k]``. It is the identity for measures
    built directly on R.
    """

    positions: np.ndarray
    weights: np.ndarray
    sorted: bool = False
    perm: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        x = np.asarray(self.positions, dtype=float).reshape(-1)
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if x.shape != w.shape:
            raise MeasureError(f"{x.size} positions but {w.size} weights")
        if not np.all(np.isfinite(x)) or not np.all(np.isfinite(w)):
            raise MeasureError("non-finite value in 1D measure")
        if np.any(w < 0):
            raise MeasureError("negative weight")
        if self.sorted and np.any(np.diff(x) < 0):
            raise MeasureError("positions flagged sorted but decrease")
        perm = np.arange(x.size) if self.perm is None else np.asarray(self.perm, dtype=np.intp)
        object.__setattr__(self, "positions", x)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "perm", perm)

    def mass(self) -> float:
        return float(np.sum(self.weights))

    def sort(self) -> "Measure1D":
        """Return a sorted copy (stable, so ties keep input order)."""
        if self.sorted:
            return self
        order = np.argsort(self.positions, kind="stable")
        return Measure1D(self.positions[order], self.weights[order], True, self.perm[order])


def mass(m) -> float:
    """Total mass ``sum_i w_i``."""
    return float(np.sum(m.weights))


def reweight(m: DiscreteMeasure, factors) -> DiscreteMeasure:
    """Multiply each atom's weight by a non-negative factor; support unchanged."""
    factors = np.asarray(factors, dtype=float).reshape(-1)
    if factors.shape[0] != m.n:
        raise MeasureError(f"expected {m.n} factors, got {factors.shape[0]}")
    if not np.all(np.isfinite(factors)) or np.any(factors < 0):
        raise MeasureError("reweighting factors must be finite and non-negative")
    return DiscreteMeasure(m.points, m.weights * factors)


def normalize_to_probability(m: DiscreteMeasure) -> DiscreteMeasure:
    total = mass(m)
    if total <= 0:
        raise MeasureError("cannot normalize a zero-mass measure")
    return DiscreteMeasure(m.points, m.weights / total)


def check_solver_input(m: DiscreteMeasure, name: str = "measure"):
    # zero-mass measures are valid objects but not valid solver inputs
    if mass(m) <= 0:
        raise MeasureError(f"{name} has zero total mass")
