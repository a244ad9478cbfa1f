"""Lower bounds on the retrieval probability under the Poisson read model.

Strands are split into three classes by read count: zero reads (erased),
``1 .. r'`` reads (treated as if read once) and more than ``r'`` reads
(treated as if read ``r' + 1`` times).  Since decoding only gets better with
more reads, the collapsed score is stochastically smaller than the true one.

Two evaluation paths give the same number:

* ``"joint"`` builds the joint PMF of ``(H_0, H~_r')`` (strands with zero
  reads, strands with at most ``r'`` reads) and averages the two-class bound
  over it.
* ``"mixture"`` notes that, strand by strand, the class is an independent
  categorical draw, so the averaged bound is exactly ``Pr(W_1 + ... + W_N >= K)``
  with ``W_j`` the class-mixed score of strand ``j``.  This costs one score
  recurrence instead of a 2-D scan and is the default for large ``N``.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np
from scipy.stats import poisson

from mdsrel import kernels
from mdsrel.consensus import ConfigurationError
from mdsrel.inner_code import OutcomeTable
from mdsrel.probkit import Pmf, gaussian_cdf
from mdsrel.retrieval import BERRY_ESSEEN_C, TAIL_EPS, OuterCode, score_moments, score_pmf_from_groups
from mdsrel.sequencing import POISSON, SamplingSpec

JOINT = "joint"
MIXTURE = "mixture"
AUTO = "auto"
REJECTED = "rejected"
JOINT_AUTO_LIMIT = 2000


class UnsupportedModelError(ConfigurationError):
    """The requested computation is only defined for the Poisson read model."""


@dataclass(frozen=True)
class BoundConfig:
    """``r_prime=None`` picks the threshold from the largest jump in alpha."""

    r_prime: int | None = None
    trunc_eps: float = 1e-12
    window_cap: int | None = None
    method: str = AUTO

    def __post_init__(self):
        if self.r_prime is not None and self.r_prime < 1:
            raise ConfigurationError(f"r' must be >= 1, got {self.r_prime}")
        if not (0.0 < self.trunc_eps <= 1e-6):
            raise ConfigurationError(f"trunc_eps={self.trunc_eps} outside (0, 1e-6]")
        if self.window_cap is not None and self.window_cap < 2:
            raise ConfigurationError("window_cap must be at least 2")
        if self.method not in (AUTO, JOINT, MIXTURE):
            raise ConfigurationError(f"unknown bound method {self.method!r}")


def default_window_cap(N: int) -> int:
    return min(N + 1, max(2, math.ceil(8.0 * math.sqrt(N * math.log(max(N, 1))))))


@dataclass(frozen=True)
class JointFreqPmf:
    """``grid[a, b] = Pr(H_0 = off0 + a, H~_r' = off1 + b)`` over the retained window."""

    off0: int
    off1: int
    grid: np.ndarray
    dropped: float
    N: int

    @property
    def retained_mass(self) -> float:
        return float(self.grid.sum())

    @property
    def mass_deficit(self) -> float:
        return max(0.0, 1.0 - self.retained_mass)

    @property
    def states(self) -> dict[tuple[int, int], float]:
        rows, cols = np.nonzero(self.grid)
        return {
            (int(self.off0 + a), int(self.off1 + b)): float(self.grid[a, b])
            for a, b in zip(rows, cols)
        }

    def prob(self, h0: int, h_prime: int) -> float:
        a, b = h0 - self.off0, h_prime - self.off1
        if 0 <= a < self.grid.shape[0] and 0 <= b < self.grid.shape[1]:
            return float(self.grid[a, b])
        return 0.0

    def marginal_h0(self) -> Pmf:
        m = self.grid.sum(axis=1)
        return Pmf(self.off0, m, truncated=True, lost=self.mass_deficit)


@dataclass(frozen=True)
class BoundResult:
    bound: float
    mass_deficit: float
    r_prime: int
    method: str

    def __iter__(self):
        # unpacks as (bound, mass_deficit)
        yield self.bound
        yield self.mass_deficit


def class_probabilities(spec: SamplingSpec, r_prime: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per strand: Pr(0 reads), Pr(1..r' reads), Pr(more than r' reads)."""
    if spec.model != POISSON:
        raise UnsupportedModelError(
            "class probabilities need the Poisson model; call spec.poissonized() to use lam = R_all"
        )
    mu = spec.lam * spec.probs
    q0 = np.exp(-mu)
    l = np.arange(1, r_prime + 1)
    qr = poisson.pmf(l[None, :], mu[:, None]).sum(axis=1) if r_prime else np.zeros_like(mu)
    qhigh = poisson.sf(r_prime, mu)
    return q0, qr, qhigh


def choose_r_prime(table: OutcomeTable) -> int:
    """Threshold just below the largest one-step jump in alpha (smallest on ties)."""
    if table.r_max < 2:
        raise ConfigurationError("choosing r' needs a table with r_max >= 2")
    jumps = np.diff(table.alpha[1:])
    return int(np.argmax(jumps)) + 1


def joint_freq_pmf(spec: SamplingSpec, r_prime: int, config: BoundConfig | None = None) -> JointFreqPmf:
    """Truncated joint PMF of strands with zero reads and with at most ``r'`` reads."""
    config = config or BoundConfig()
    if r_prime < 1:
        raise ConfigurationError(f"r' must be >= 1, got {r_prime}")
    q0, qr, _ = class_probabilities(spec, r_prime)
    cap = config.window_cap or default_window_cap(spec.N)
    off0, off1, grid, dropped = kernels.joint_dp(q0, qr, rel_eps=config.trunc_eps, cap=cap)
    return JointFreqPmf(off0, off1, grid, dropped, spec.N)


def _uniform_pmf(count: int, row: tuple[float, float, float]) -> Pmf:
    if count == 0:
        return Pmf.delta(0)
    d = score_pmf_from_groups([row[0]], [row[1]], [row[2]], [count])
    return d.pmf


def two_class_bound(h0: int, h_prime: int, r_prime: int, N: int, K: int,
                    table: OutcomeTable, s_set=None) -> float:
    """Collapsed-score bound for a fixed read tally.

    ``h_prime - h0`` strands score as if read once, ``N - h_prime`` as if read
    ``r' + 1`` times, the remaining ``h0`` are erased.  ``s_set`` restricts the
    values of the low-class score that are summed over (default: all).
    """
    if not (0 <= h0 <= h_prime <= N):
        raise ValueError(f"need 0 <= h0 <= h' <= N, got ({h0}, {h_prime}, {N})")
    table = table.extended(r_prime + 1)
    low = _uniform_pmf(h_prime - h0, table.row(1))
    high = _uniform_pmf(N - h_prime, table.row(r_prime + 1))
    surv = np.concatenate([np.cumsum(high.mass[::-1])[::-1], [0.0]])
    total = 0.0
    for s, p in zip(low.support, low.mass):
        if p == 0.0 or (s_set is not None and s not in s_set):
            continue
        idx = min(max(K - s - high.offset, 0), high.mass.size)
        total += p * surv[idx]
    return min(total, 1.0)


class _TwoClassCache:
    """Score PMFs for ``a`` low-class and ``b`` high-class strands, built
    incrementally and shared across tally states."""

    def __init__(self, low_row, high_row):
        self._lock = threading.Lock()
        self._rows = (low_row, high_row)
        self._pmfs: tuple[dict, dict] = ({0: Pmf.delta(0)}, {0: Pmf.delta(0)})
        self._surv: dict[int, np.ndarray] = {}

    def pmf(self, which: int, count: int) -> Pmf:
        with self._lock:
            cache = self._pmfs[which]
            if count not in cache:
                # extend the largest cached count below this one
                base = max(c for c in cache if c <= count)
                a, b, g = self._rows[which]
                prev = cache[base]
                off, mass, _, _ = kernels.score_dp(
                    [a], [b], [g], [count - base], tail_eps=TAIL_EPS,
                    init_offset=prev.offset, init_mass=prev.mass,
                )
                cache[count] = Pmf(off, np.clip(mass, 0.0, None), truncated=True)
            return cache[count]

    def survival(self, count: int) -> tuple[int, np.ndarray]:
        high = self.pmf(1, count)
        with self._lock:
            if count not in self._surv:
                self._surv[count] = np.concatenate([np.cumsum(high.mass[::-1])[::-1], [0.0]])
            return high.offset, self._surv[count]

    def bound(self, a: int, b: int, K: int) -> float:
        low = self.pmf(0, a)
        off, surv = self.survival(b)
        idx = np.clip(K - low.support - off, 0, surv.size - 1)
        return float(np.dot(low.mass, surv[idx]))


def _joint_bound(spec, outer, table, r_prime, config) -> BoundResult:
    jf = joint_freq_pmf(spec, r_prime, config)
    cache = _TwoClassCache(table.row(1), table.row(r_prime + 1))
    N, K = outer.N, outer.K
    total = 0.0
    memo: dict[tuple[int, int], float] = {}
    rows, cols = np.nonzero(jf.grid)
    for ia, ib in zip(rows, cols):
        h0, hp = jf.off0 + int(ia), jf.off1 + int(ib)
        key = (hp - h0, N - hp)
        if key not in memo:
            memo[key] = cache.bound(key[0], key[1], K)
        total += memo[key] * jf.grid[ia, ib]
    return BoundResult(min(float(total), 1.0), jf.mass_deficit, r_prime, JOINT)


def mixture_rows(spec: SamplingSpec, table: OutcomeTable, r_prime: int):
    """Per-strand outcome probabilities after mixing over the three read classes."""
    q0, qr, qhigh = class_probabilities(spec, r_prime)
    a1, b1, g1 = table.row(1)
    ah, bh, gh = table.row(r_prime + 1)
    alpha = qr * a1 + qhigh * ah
    beta = qr * b1 + qhigh * bh
    gamma = q0 + qr * g1 + qhigh * gh
    # the three class probabilities come from separate pmf/sf calls
    total = alpha + beta + gamma
    return alpha / total, beta / total, gamma / total


def _mixture_bound(spec, outer, table, r_prime) -> BoundResult:
    alpha, beta, gamma = mixture_rows(spec, table, r_prime)
    rows = np.stack([alpha, beta, gamma], axis=1)
    uniq, mult = np.unique(rows, axis=0, return_counts=True)
    d = score_pmf_from_groups(uniq[:, 0], uniq[:, 1], uniq[:, 2], mult, outer.K)
    return BoundResult(float(d.success_prob), d.truncation_loss, r_prime, MIXTURE)


def retrieval_bound(spec: SamplingSpec, outer: OuterCode, table: OutcomeTable,
                    config: BoundConfig | None = None) -> BoundResult:
    """Lower bound on the retrieval probability for Poisson sampling.

    Truncation only discards non-negative terms, so the bound stays valid; the
    discarded probability is reported as ``mass_deficit``.
    """
    config = config or BoundConfig()
    if spec.N != outer.N:
        raise ConfigurationError(f"sampling vector has {spec.N} strands, code has N={outer.N}")
    if spec.model != POISSON:
        raise UnsupportedModelError(
            "the bound is defined for the Poisson model; call spec.poissonized() to use lam = R_all"
        )
    r_prime = config.r_prime or choose_r_prime(table)
    table = table.extended(r_prime + 1)
    method = config.method
    if method == AUTO:
        method = JOINT if outer.N <= JOINT_AUTO_LIMIT else MIXTURE
    if method == JOINT:
        return _joint_bound(spec, outer, table, r_prime, config)
    return _mixture_bound(spec, outer, table, r_prime)


def clt_mixture_score(spec: SamplingSpec, table: OutcomeTable, K: int, r_prime: int) -> tuple[float, float]:
    """Gaussian estimate of the mixture bound and a guaranteed error radius.

    The radius is the classical Berry-Esseen bound ``C * zeta / sigma^3`` for
    independent, non-identical summands, so the exact value lies within it.
    """
    alpha, beta, gamma = mixture_rows(spec, table, r_prime)
    mu, var, zeta = score_moments(alpha, beta, gamma)
    if var <= 0.0:
        return (1.0 if mu >= K else 0.0), 0.0
    sigma = math.sqrt(var)
    return gaussian_cdf((mu - K + 0.5) / sigma), BERRY_ESSEEN_C * zeta / sigma ** 3


def best_retrieval_bound(spec: SamplingSpec, outer: OuterCode, table: OutcomeTable,
                         r_primes=range(1, 9), top: int | None = 3,
                         level: float | None = None) -> BoundResult:
    """Largest mixture bound over several thresholds ``r'``.

    Every ``r'`` yields a valid lower bound, so the maximum is one too.  With
    ``top`` set, only the ``top`` thresholds with the best Gaussian estimate
    are evaluated exactly.  With ``level`` set, thresholds whose Gaussian
    estimate plus error radius stays below ``level`` are skipped; if all are
    skipped the result has method ``"rejected"`` and its bound field holds
    that (sub-``level``) ceiling instead of a computed bound.
    """
    spec = spec.poissonized()
    r_primes = list(r_primes)
    if not r_primes:
        raise ConfigurationError("need at least one r' candidate")
    table = table.extended(max(r_primes) + 1)
    est = {r: clt_mixture_score(spec, table, outer.K, r) for r in r_primes}
    if level is not None:
        ceiling = {r: min(1.0, a + e) for r, (a, e) in est.items()}
        live = [r for r in r_primes if ceiling[r] >= level]
        if not live:
            r_top = max(r_primes, key=lambda r: (ceiling[r], -r))
            return BoundResult(ceiling[r_top], 0.0, r_top, REJECTED)
        r_primes = live
    if top is not None and len(r_primes) > top:
        order = sorted(r_primes, key=lambda r: (-est[r][0], r))
        r_primes = sorted(order[:top])
    best = None
    for r in r_primes:
        res = _mixture_bound(spec, outer, table, r)
        if best is None or res.bound > best.bound:
            best = res
        if level is not None and best.bound >= level:
            break
    return best
