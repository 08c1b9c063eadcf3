"""Entropy functions, their conjugates and phi-divergences (KL / TV / balanced)."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

# exp() arguments are clamped to this range everywhere in the package
EXP_CLAMP = 700.0


class Kind(str, enum.Enum):
    KL = "kl"
    TV = "tv"
    BALANCED = "balanced"


class SolverError(RuntimeError):
    """Raised when a solver is asked for something it cannot compute."""


@dataclass(frozen=True)
class DivergenceSpec:
    kind: Kind = Kind.KL
    rho: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.kind is not Kind.BALANCED:
            if not (math.isfinite(self.rho) and self.rho > 0):
                raise ValueError(f"rho must be finite and > 0, got {self.rho}")


@dataclass(frozen=True)
class UnbalancedParams:
    """Solver configuration shared by the sliced unbalanced solvers.

    ``div1`` penalizes the first marginal (the ``alpha`` side), ``div2`` the
    second. ``fw_tol`` enables early stopping when the dual objective
    increases by less than the given amount between iterations.
    """

    div1: DivergenceSpec = field(default_factory=DivergenceSpec)
    div2: DivergenceSpec = field(default_factory=DivergenceSpec)
    p: float = 2.0
    n_projections: int = 500
    fw_iters: int = 20
    seed: int = 0
    fw_tol: float | None = None

    def __post_init__(self):
        if not self.p >= 1:
            raise ValueError(f"cost exponent p must be >= 1, got {self.p}")
        if self.n_projections < 1:
            raise ValueError("n_projections must be >= 1")
        if self.fw_iters < 1:
            raise ValueError("fw_iters must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")

    @classmethod
    def kl(cls, rho1: float = 1.0, rho2: float | None = None, **kwargs) -> "UnbalancedParams":
        rho2 = rho1 if rho2 is None else rho2
        return cls(DivergenceSpec(Kind.KL, rho1), DivergenceSpec(Kind.KL, rho2), **kwargs)

    @property
    def rho1(self) -> float:
        return self.div1.rho

    @property
    def rho2(self) -> float:
        return self.div2.rho

    def require_smooth(self):
        if self.div1.kind is not Kind.KL or self.div2.kind is not Kind.KL:
            raise SolverError(
                "FW requires smooth phi-circ: both divergences must be KL "
                f"(got {self.div1.kind.value}/{self.div2.kind.value})")


def phi_circ(spec: DivergenceSpec, x):
    """Evaluate ``phi°(x) = -phi*(-x)``.

    KL gives ``rho (1 - exp(-x / rho))``; balanced is the identity; TV is
    ``x`` on ``[-rho, rho]``, ``rho`` above and ``-inf`` below.
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("phi_circ needs finite arguments")
    if spec.kind is Kind.BALANCED:
        out = x.copy()
    elif spec.kind is Kind.KL:
        # expm1 keeps full precision when |x| << rho
        out = -spec.rho * np.expm1(np.clip(-x / spec.rho, -EXP_CLAMP, EXP_CLAMP))
    else:
        out = np.where(x < -spec.rho, -np.inf, np.minimum(x, spec.rho))
    return float(out) if out.ndim == 0 else out


def phi_circ_grad(spec: DivergenceSpec, x):
    """Derivative of :func:`phi_circ` (KL: ``exp(-x / rho)``)."""
    x = np.asarray(x, dtype=float)
    if spec.kind is Kind.KL:
        return np.exp(np.clip(-x / spec.rho, -EXP_CLAMP, EXP_CLAMP))
    if spec.kind is Kind.BALANCED:
        return np.ones_like(x)
    raise SolverError("phi_circ is not differentiable for TV")


def kl_divergence(pi, alpha, rho: float = 1.0) -> float:
    """``rho * KL(pi | alpha)`` between reweightings of a common support.

    Returns ``inf`` when ``pi`` puts mass where ``alpha`` has none.
    """
    pi = np.asarray(pi, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    if pi.shape != alpha.shape:
        raise ValueError("pi and alpha must be index-aligned")
    if np.any((pi > 0) & (alpha <= 0)):
        return math.inf
    pos = pi > 0
    ratio = np.ones_like(pi)
    ratio[pos] = pi[pos] / alpha[pos]
    # 0 log 0 = 0, so atoms with pi = 0 contribute just alpha
    terms = np.where(pos, pi * np.log(ratio) - pi + alpha, alpha)
    # each term is alpha * (r log r - r + 1) >= 0; drop rounding below zero
    return float(rho * np.sum(np.maximum(terms, 0.0)))


def tv_divergence(pi, alpha, rho: float = 1.0) -> float:
    pi = np.asarray(pi, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    if pi.shape != alpha.shape:
        raise ValueError("pi and alpha must be index-aligned")
    return float(rho * np.sum(np.abs(pi - alpha)))


def divergence(spec: DivergenceSpec, pi, alpha) -> float:
    if spec.kind is Kind.KL:
        return kl_divergence(pi, alpha, spec.rho)
    if spec.kind is Kind.TV:
        return tv_divergence(pi, alpha, spec.rho)
    return 0.0 if np.allclose(pi, alpha, rtol=0, atol=1e-12) else math.inf
