"""Post-consensus error rates for base-by-base majority voting over a QSC."""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from mdsrel.probkit import log_binomial_pmf, log_sum

R_ENUM_CAP = 512


class ConfigurationError(ValueError):
    """Raised for parameter combinations the model does not define."""


@dataclass(frozen=True)
class ConsensusRates:
    r: int
    epsilon: float
    eps_r: float
    eps_sym_r: float
    m: int


def enumerate_tally_vectors(r: int) -> list[tuple[tuple[int, int, int, int], int]]:
    """All vote tallies where the true base is (weakly) the most frequent.

    Returns ``(kappa, omega)`` pairs; ``omega`` counts the letters tied with the
    true base, including itself.
    """
    out = []
    if r <= 0:
        return out
    for k1 in range(r + 1):
        for k2 in range(min(k1, r - k1) + 1):
            for k3 in range(min(k1, r - k1 - k2) + 1):
                k4 = r - k1 - k2 - k3
                if k4 > k1:
                    continue
                omega = 1 + (k2 == k1) + (k3 == k1) + (k4 == k1)
                out.append(((k1, k2, k3, k4), omega))
    return out


def consensus_success_enumerated(epsilon: float, r: int) -> float:
    """Probability that the vote returns the true base, summed term by term over
    the tally set.  Brute force; intended for small ``r``."""
    tallies = enumerate_tally_vectors(r)
    if not tallies:
        return 0.0
    kap = np.array([k for k, _ in tallies], dtype=np.float64)
    omega = np.array([w for _, w in tallies], dtype=np.float64)
    if epsilon == 0.0:
        return float(np.sum((kap[:, 0] == r) / omega))
    logs = (
        gammaln(r + 1.0) - gammaln(kap + 1.0).sum(axis=1)
        + kap[:, 0] * math.log1p(-epsilon)
        + (r - kap[:, 0]) * math.log(epsilon / 3.0)
        - np.log(omega)
    )
    return math.exp(log_sum(logs))


class _LossTable:
    """``loss[k1, e]``: probability the vote goes wrong given ``k1`` correct reads
    and ``e`` wrong reads spread uniformly over the three other letters.

    The table does not depend on epsilon, so one copy serves every channel.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self.table = np.zeros((1, 1))

    def get(self, size: int) -> np.ndarray:
        with self._lock:
            if self.table.shape[0] <= size:
                self.table = self._build(max(size, 2 * self.table.shape[0], 64))
            return self.table

    @staticmethod
    def _build(emax: int) -> np.ndarray:
        loss = np.zeros((emax + 1, emax + 1))
        for e in range(emax + 1):
            c2, c3 = np.meshgrid(np.arange(e + 1), np.arange(e + 1), indexing="ij")
            ok = c2 + c3 <= e
            c2 = c2[ok]
            c3 = c3[ok]
            c4 = e - c2 - c3
            prob = np.exp(
                gammaln(e + 1.0) - gammaln(c2 + 1.0) - gammaln(c3 + 1.0) - gammaln(c4 + 1.0)
                - e * math.log(3.0)
            )
            top = np.maximum(np.maximum(c2, c3), c4)
            ties = (c2 == top).astype(np.int64) + (c3 == top) + (c4 == top)
            by_max = np.bincount(top, weights=prob, minlength=e + 1)
            tie_loss = np.bincount(top, weights=prob * ties / (1.0 + ties), minlength=e + 1)
            above = np.concatenate([np.cumsum(by_max[::-1])[::-1][1:], [0.0]])
            # k1 <= e: wrong letters beat k1 outright, or tie with it
            loss[: e + 1, e] = above + tie_loss
        return loss


_LOSS = _LossTable()


@lru_cache(maxsize=None)
def consensus_error_rate(epsilon: float, r: int) -> float | None:
    """Exact error rate of the majority-vote consensus over ``r`` reads.

    ``r = 0`` has no consensus and returns ``None``.  Read counts above
    ``R_ENUM_CAP`` reuse the value at the cap.
    """
    if not (0.0 <= epsilon <= 1.0):
        raise ConfigurationError(f"epsilon={epsilon} outside [0, 1]")
    if r < 0:
        raise ConfigurationError(f"negative read count {r}")
    if r == 0:
        return None
    if epsilon == 0.0:
        return 0.0
    r = min(r, R_ENUM_CAP)
    loss = _LOSS.get(r)
    k1 = np.arange(r // 2 + 1)
    e = r - k1
    lw = loss[k1, e]
    # the true base has probability 1 - epsilon per read
    logs = log_binomial_pmf(k1, r, 1.0 - epsilon) + np.log(np.where(lw > 0, lw, 1.0))
    logs = np.where(lw > 0, logs, -np.inf)
    return min(math.exp(log_sum(logs)), 1.0)


def symbol_error_rate(eps_r: float, m: int) -> float:
    """Error rate of an ``m``-bit symbol made of ``m/2`` nucleotides."""
    if m < 2 or m % 2:
        raise ConfigurationError(f"bits per symbol must be even and >= 2, got {m}")
    if not (0.0 <= eps_r <= 1.0):
        raise ConfigurationError(f"eps_r={eps_r} outside [0, 1]")
    if eps_r == 1.0:
        return 1.0
    return -math.expm1((m // 2) * math.log1p(-eps_r))


def consensus_rates(epsilon: float, r: int, m: int) -> ConsensusRates:
    eps_r = consensus_error_rate(epsilon, r)
    if eps_r is None:
        raise ConfigurationError("no consensus exists for zero reads")
    return ConsensusRates(r, epsilon, eps_r, symbol_error_rate(eps_r, m), m)
