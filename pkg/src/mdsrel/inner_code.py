"""Decoding outcomes of the inner MDS code under bounded-distance decoding.

For every read count ``r`` the consensus strand is decoded into one of three
outcomes: success (alpha), miscorrection (beta) or detected failure (gamma).
The miscorrection fractions ``eta_i`` come from the MDS weight enumerator and
an exact count of weight-``i`` words falling into a radius-``t`` sphere around
some nonzero codeword.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb

import numpy as np

from mdsrel.consensus import ConfigurationError, consensus_error_rate, symbol_error_rate
from mdsrel.probkit import log_binomial_pmf, log_sum


@dataclass(frozen=True)
class InnerCode:
    """An ``(n_sym, k_sym)`` MDS code over an alphabet of size ``q``.

    ``q`` defaults to ``2**m``; pass it explicitly for prime-field test codes.
    """

    n_sym: int
    k_sym: int
    m: int = 8
    q: int | None = None

    def __post_init__(self):
        if self.q is None:
            object.__setattr__(self, "q", 2 ** self.m)
        if not (0 < self.k_sym <= self.n_sym):
            raise ConfigurationError(f"need 0 < k' <= n', got ({self.n_sym}, {self.k_sym})")
        if (self.n_sym - self.k_sym) % 2:
            raise ConfigurationError("n' - k' must be even")
        if self.q < self.n_sym:
            raise ConfigurationError(f"alphabet size {self.q} < length {self.n_sym}: no MDS code")

    @property
    def t(self) -> int:
        return (self.n_sym - self.k_sym) // 2

    @property
    def d_min(self) -> int:
        return self.n_sym - self.k_sym + 1

    @property
    def rate(self) -> float:
        return self.k_sym / self.n_sym


@dataclass(frozen=True)
class OutcomeTable:
    """Per-read-count decoding probabilities, indexed by ``r = 0 .. r_max``."""

    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    code: InnerCode | None = field(default=None, compare=False)
    epsilon: float | None = field(default=None, compare=False)

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not (self.alpha.shape == self.beta.shape == self.gamma.shape) or self.alpha.ndim != 1:
            raise ValueError("alpha, beta, gamma must be 1-D arrays of equal length")
        if np.any(np.abs(self.alpha + self.beta + self.gamma - 1.0) > 1e-12):
            raise ValueError("outcome probabilities must sum to one for every r")

    @property
    def r_max(self) -> int:
        return self.alpha.size - 1

    def row(self, r: int) -> tuple[float, float, float]:
        return float(self.alpha[r]), float(self.beta[r]), float(self.gamma[r])

    def extended(self, r_max: int) -> "OutcomeTable":
        """Same table grown to ``r_max``; needs the code and epsilon it was built from."""
        if r_max <= self.r_max:
            return self
        if self.code is None or self.epsilon is None:
            raise ConfigurationError(
                f"read count {r_max} exceeds table r_max {self.r_max} and the table cannot be extended"
            )
        return build_outcome_table(self.code, self.epsilon, r_max)

    @classmethod
    def from_rows(cls, rows) -> "OutcomeTable":
        rows = np.asarray(rows, dtype=np.float64)
        return cls(rows[:, 0], rows[:, 1], rows[:, 2])


@lru_cache(maxsize=None)
def _weight_distribution(n: int, k: int, q: int) -> tuple[int, ...]:
    d = n - k + 1
    weights = [0] * (n + 1)
    weights[0] = 1
    for h in range(d, n + 1):
        acc = 0
        for j in range(h - d + 1):
            acc += (-1) ** j * comb(h, j) * (q ** (h - d + 1 - j) - 1)
        weights[h] = comb(n, h) * acc
    return tuple(weights)


def mds_weight_distribution(code: InnerCode) -> list[int]:
    """Number of codewords of each Hamming weight (exact integers)."""
    return list(_weight_distribution(code.n_sym, code.k_sym, code.q))


def _sphere_hits(n: int, q: int, t: int, h: int, i: int) -> int:
    """Weight-``i`` words within distance ``t`` of a fixed weight-``h`` word."""
    total = 0
    for s in range(t + 1):
        # a: support positions zeroed, b: support positions changed to another
        # nonzero value, c: positions outside the support made nonzero
        for a in range(min(h, s) + 1):
            c = i - h + a
            b = s - a - c
            if c < 0 or b < 0 or c > n - h or a + b > h:
                continue
            total += comb(h, a) * comb(h - a, b) * (q - 2) ** b * comb(n - h, c) * (q - 1) ** c
    return total


@lru_cache(maxsize=None)
def _miscorrection_counts(n: int, k: int, q: int) -> tuple[tuple[int, int], ...]:
    """``(D_i, C(n, i) (q-1)^i)`` for ``i = 0 .. n``."""
    t = (n - k) // 2
    weights = _weight_distribution(n, k, q)
    d = n - k + 1
    out = []
    for i in range(n + 1):
        hits = 0
        if i > t:
            for h in range(d, n + 1):
                if weights[h] and abs(h - i) <= t:
                    hits += weights[h] * _sphere_hits(n, q, t, h, i)
        out.append((hits, comb(n, i) * (q - 1) ** i))
    return tuple(out)


def miscorrection_fraction(code: InnerCode, i: int) -> float:
    """Fraction of weight-``i`` error patterns that BDD turns into a wrong codeword."""
    if code.t < 1:
        raise ConfigurationError("miscorrection fractions need t >= 1")
    if not (code.t < i <= code.n_sym):
        raise ValueError(f"error weight {i} outside [t+1, n'] = [{code.t + 1}, {code.n_sym}]")
    hits, total = _miscorrection_counts(code.n_sym, code.k_sym, code.q)[i]
    return float(Fraction(hits, total))


def miscorrection_fractions(code: InnerCode) -> np.ndarray:
    """``eta[i]`` for ``i = 0 .. n'``; entries with ``i <= t`` are zero."""
    counts = _miscorrection_counts(code.n_sym, code.k_sym, code.q)
    eta = np.zeros(code.n_sym + 1)
    for i in range(code.t + 1, code.n_sym + 1):
        hits, total = counts[i]
        eta[i] = float(Fraction(hits, total)) if code.t >= 1 else 1.0
    return eta


def outcome_probs(code: InnerCode, eps_sym: float) -> tuple[float, float, float]:
    """``(alpha, beta, gamma)`` for i.i.d. symbol errors with rate ``eps_sym``."""
    if not (0.0 <= eps_sym <= 1.0):
        raise ConfigurationError(f"eps_sym={eps_sym} outside [0, 1]")
    n, t = code.n_sym, code.t
    logs = log_binomial_pmf(np.arange(n + 1), n, eps_sym)
    alpha = math.exp(log_sum(logs[: t + 1]))
    if t == 0:
        # every received word is a codeword: all errors go undetected
        return alpha, math.exp(log_sum(logs[1:])), 0.0
    eta = miscorrection_fractions(code)[t + 1:]
    tail = logs[t + 1:]
    with np.errstate(divide="ignore"):
        beta = math.exp(log_sum(tail + np.log(eta)))
        gamma = math.exp(log_sum(tail + np.log1p(-eta)))
    return alpha, beta, gamma


def build_outcome_table(code: InnerCode, epsilon: float, r_max: int) -> OutcomeTable:
    """Chain consensus, symbol grouping and BDD for ``r = 0 .. r_max``."""
    if r_max < 1:
        raise ConfigurationError("r_max must be at least 1")
    rows = [(0.0, 0.0, 1.0)]
    rows.extend(_table_row(code, epsilon, r) for r in range(1, r_max + 1))
    rows = np.array(rows)
    return OutcomeTable(rows[:, 0], rows[:, 1], rows[:, 2], code=code, epsilon=epsilon)


@lru_cache(maxsize=65536)
def _table_row(code: InnerCode, epsilon: float, r: int) -> tuple[float, float, float]:
    eps_r = consensus_error_rate(epsilon, r)
    return outcome_probs(code, symbol_error_rate(eps_r, code.m))
