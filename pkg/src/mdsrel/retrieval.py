"""Retrieval probability for a fixed read profile.

Each strand contributes a score ``+1`` (decoded correctly), ``-1``
(miscorrected) or ``0`` (erased).  The outer MDS code recovers the data
whenever the total score reaches ``K``, so ``Pr(S_N >= K)`` lower-bounds the
retrieval probability.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, xlogy

from mdsrel import kernels
from mdsrel.consensus import ConfigurationError
from mdsrel.inner_code import OutcomeTable
from mdsrel.probkit import Pmf, gaussian_cdf

TAIL_EPS = 1e-15
BERRY_ESSEEN_C = 0.5606


@dataclass(frozen=True)
class OuterCode:
    """An ``(N, K)`` MDS code over ``M``-bit symbols; ``M`` defaults to the smallest valid size."""

    N: int
    K: int
    M: int | None = None

    def __post_init__(self):
        if self.N < 1 or not (1 <= self.K <= self.N):
            raise ConfigurationError(f"need 1 <= K <= N, got N={self.N}, K={self.K}")
        if self.M is None:
            object.__setattr__(self, "M", max(1, math.ceil(math.log2(self.N))))
        if 2 ** self.M < self.N:
            raise ConfigurationError(f"2^M = {2 ** self.M} < N = {self.N}")

    @property
    def rate(self) -> float:
        return self.K / self.N


@dataclass(frozen=True)
class ScoreDistribution:
    pmf: Pmf
    K: int
    success_prob: float
    truncation_loss: float = 0.0


def _tail(pmf: Pmf, K: int) -> float:
    return min(pmf.tail(K), 1.0)


def _success(pmf: Pmf, K: int, lost_lo: float) -> float:
    """``Pr(S >= K)`` from whichever side of ``K`` carries less mass.

    Summing ~1e4 nearly-one terms leaves an error of a few ulps below 1, so
    near-certain success is taken as one minus the failure mass.  Trimmed
    lower-tail mass always counts as failure.
    """
    i = K - pmf.offset
    if i >= pmf.mass.size:
        return 0.0
    below = lost_lo + (float(pmf.mass[:i].sum()) if i > 0 else 0.0)
    if below < 0.5:
        return min(max(1.0 - below, 0.0), 1.0)
    return _tail(pmf, K)


def group_profile(profile) -> tuple[np.ndarray, np.ndarray]:
    """Distinct read counts and how many strands carry each."""
    profile = np.asarray(profile, dtype=np.int64)
    if profile.ndim != 1 or profile.size == 0:
        raise ConfigurationError("read profile must be a non-empty 1-D sequence")
    if np.any(profile < 0):
        raise ConfigurationError("read counts must be non-negative")
    return np.unique(profile, return_counts=True)


def score_pmf_from_groups(alpha, beta, gamma, mult, K: int = 0, tail_eps: float = TAIL_EPS) -> ScoreDistribution:
    """Score distribution when ``mult[g]`` strands share outcome row ``g``."""
    alpha, beta, gamma = (np.asarray(x, dtype=np.float64) for x in (alpha, beta, gamma))
    # rows are only normalized to ~1e-15; over 1e5 strands that drift adds up
    total = alpha + beta + gamma
    alpha, beta, gamma = alpha / total, beta / total, gamma / total
    off, mass, lost_lo, lost_hi = kernels.score_dp(alpha, beta, gamma, mult, tail_eps=tail_eps)
    loss = lost_lo + lost_hi
    np.clip(mass, 0.0, None, out=mass)
    pmf = Pmf(off, mass, truncated=loss > 0.0, lost=loss)
    return ScoreDistribution(pmf, int(K), _success(pmf, K, lost_lo), loss)


def score_pmf(profile, table: OutcomeTable, K: int = 0, tail_eps: float = TAIL_EPS) -> ScoreDistribution:
    """Exact score PMF for a read profile, strands grouped by read count.

    Tail entries are dropped while the discarded mass per side stays within
    ``tail_eps``; the total discarded mass is reported as ``truncation_loss``
    and trimmed lower-tail mass is counted as failure.
    """
    counts, mult = group_profile(profile)
    if counts[-1] > table.r_max:
        raise ConfigurationError(f"read count {counts[-1]} exceeds table r_max {table.r_max}")
    return score_pmf_from_groups(table.alpha[counts], table.beta[counts], table.gamma[counts], mult, K, tail_eps)


def score_pmf_naive(profile, table: OutcomeTable, K: int = 0) -> ScoreDistribution:
    """Strand-by-strand recurrence over the full support ``[-N, N]``."""
    profile = np.asarray(profile, dtype=np.int64)
    n = profile.size
    mass = np.zeros(2 * n + 1)
    mass[n] = 1.0
    for r in profile:
        a, b, c = table.row(int(r))
        new = c * mass
        new[1:] += a * mass[:-1]
        new[:-1] += b * mass[1:]
        mass = new
    pmf = Pmf(-n, mass)
    return ScoreDistribution(pmf, int(K), _tail(pmf, K))


def score_pmf_uniform(N: int, r: int, table: OutcomeTable, K: int = 0) -> ScoreDistribution:
    """Closed-form trinomial PMF when all ``N`` strands are read ``r`` times."""
    if N < 1:
        raise ConfigurationError("N must be at least 1")
    a, b, c = table.row(r)
    s = np.arange(-N, N + 1)
    mass = np.zeros(s.size)
    for idx, sv in enumerate(s):
        i = np.arange(max(-sv, 0), (N - sv) // 2 + 1, dtype=np.float64)
        if i.size == 0:
            continue
        up, mid = i + sv, N - 2 * i - sv
        logs = (
            gammaln(N + 1.0) - gammaln(up + 1.0) - gammaln(i + 1.0) - gammaln(mid + 1.0)
            + xlogy(up, a) + xlogy(i, b) + xlogy(mid, c)
        )
        mass[idx] = np.exp(logs).sum()
    pmf = Pmf(-N, np.clip(mass, 0.0, 1.0))
    return ScoreDistribution(pmf, int(K), _tail(pmf, K))


def success_condition_check(e_era: int, e_sub: int, outer: OuterCode) -> bool:
    """MDS decodability: erasures plus twice the substitutions fit in the redundancy."""
    if e_era < 0 or e_sub < 0 or e_era + e_sub > outer.N:
        raise ValueError(f"invalid error counts ({e_era}, {e_sub}) for N={outer.N}")
    return e_era + 2 * e_sub <= outer.N - outer.K


def score_moments(alpha, beta, gamma) -> tuple[float, float, float]:
    """Mean, variance and summed third absolute central moment of the score."""
    alpha, beta, gamma = (np.asarray(x, dtype=np.float64) for x in (alpha, beta, gamma))
    mu = alpha - beta
    var = alpha + beta - mu ** 2
    zeta = alpha * np.abs(1 - mu) ** 3 + beta * np.abs(1 + mu) ** 3 + gamma * np.abs(mu) ** 3
    return float(mu.sum()), float(np.clip(var, 0.0, None).sum()), float(zeta.sum())


def clt_success_approx(profile, table: OutcomeTable, K: int) -> tuple[float, float]:
    """Gaussian approximation of ``Pr(S_N >= K)`` and its Berry-Esseen style error bound."""
    profile = np.asarray(profile, dtype=np.int64)
    if profile.size and profile.max() > table.r_max:
        raise ConfigurationError(f"read count {profile.max()} exceeds table r_max {table.r_max}")
    n = profile.size
    mu, var, zeta = score_moments(table.alpha[profile], table.beta[profile], table.gamma[profile])
    if var <= 0.0:
        return (1.0 if mu >= K else 0.0), 0.0
    sigma = math.sqrt(var)
    approx = gaussian_cdf((mu - K + 0.5) / sigma)
    return approx, BERRY_ESSEEN_C * zeta / (math.sqrt(n) * sigma ** 1.5)
