"""Numerically stable probability primitives.

Everything that can get small (binomial tails, miscorrection mass, retrieval
error probabilities) is accumulated in log-space and only exponentiated when
handed back to the caller.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class Pmf:
    """Probability mass function on the integers ``offset .. offset + len(mass) - 1``.

    ``truncated`` marks a Pmf whose tails were cut off on purpose; its total
    mass may then be below one and ``lost`` records how much went missing.
    """

    offset: int
    mass: np.ndarray
    truncated: bool = False
    lost: float = 0.0

    def __post_init__(self):
        mass = np.ascontiguousarray(self.mass, dtype=np.float64)
        if mass.ndim != 1 or mass.size == 0:
            raise ValueError("Pmf mass must be a non-empty 1-D array")
        object.__setattr__(self, "mass", mass)
        object.__setattr__(self, "offset", int(self.offset))
        if np.any(mass < 0.0) or np.any(mass > 1.0 + 1e-12):
            raise ValueError("Pmf entries must lie in [0, 1]")
        total = float(mass.sum())
        if self.truncated:
            if total > 1.0 + 1e-9:
                raise ValueError(f"truncated Pmf has total mass {total} > 1")
        elif abs(total - 1.0) > 1e-9:
            raise ValueError(f"Pmf total mass {total} is not 1")

    @classmethod
    def delta(cls, at: int = 0) -> "Pmf":
        return cls(at, np.ones(1))

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.offset, self.offset + self.mass.size)

    @property
    def total(self) -> float:
        return float(self.mass.sum())

    def at(self, s: int) -> float:
        i = s - self.offset
        if 0 <= i < self.mass.size:
            return float(self.mass[i])
        return 0.0

    def tail(self, k: int) -> float:
        """Pr(X >= k) over the retained mass."""
        i = max(k - self.offset, 0)
        if i >= self.mass.size:
            return 0.0
        return float(self.mass[i:].sum())

    def mean(self) -> float:
        return float(np.dot(self.support, self.mass) / self.mass.sum())


def convolve(a: Pmf, b: Pmf) -> Pmf:
    """Distribution of the sum of two independent integer variables."""
    mass = np.convolve(a.mass, b.mass)
    np.clip(mass, 0.0, None, out=mass)
    truncated = a.truncated or b.truncated
    lost = a.lost + b.lost if truncated else 0.0
    return Pmf(a.offset + b.offset, mass, truncated=truncated, lost=lost)


def log_binomial_pmf(x, n: int, p: float):
    """log f(x; n, p), vectorised over ``x``; -inf where the mass is zero."""
    x = np.asarray(x, dtype=np.float64)
    out = np.full(x.shape, -np.inf)
    ok = (x >= 0) & (x <= n)
    if p == 0.0:
        out[ok & (x == 0)] = 0.0
        return out
    if p == 1.0:
        out[ok & (x == n)] = 0.0
        return out
    xs = x[ok]
    out[ok] = (
        gammaln(n + 1.0) - gammaln(xs + 1.0) - gammaln(n - xs + 1.0)
        + xs * math.log(p) + (n - xs) * math.log1p(-p)
    )
    return out


def binomial_pmf_cdf(x: int, n: int, p: float) -> tuple[float, float]:
    """Return ``(f(x; n, p), F(x; n, p))`` for a binomial variable."""
    if not (0 <= x <= n):
        raise ValueError(f"need 0 <= x <= n, got x={x}, n={n}")
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"p={p} outside [0, 1]")
    logs = log_binomial_pmf(np.arange(x + 1), n, p)
    pmf = math.exp(logs[-1])
    if x == n:
        return pmf, 1.0
    cdf = math.exp(logsumexp(logs)) if np.isfinite(logs).any() else 0.0
    return pmf, min(cdf, 1.0)


def gaussian_cdf(x: float) -> float:
    """Standard normal CDF via the complementary error function."""
    return 0.5 * math.erfc(-x / SQRT2)


def log_sum(logs) -> float:
    logs = np.asarray(logs, dtype=np.float64)
    if logs.size == 0 or not np.isfinite(logs).any():
        return -math.inf
    return float(logsumexp(logs))
