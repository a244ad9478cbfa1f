"""Sequencing-cost and synthesis-cost optimization.

``min_reads`` finds the fewest reads meeting a reliability target for a fixed
code.  ``opt_density`` searches inner/outer code rates for the highest
information density that stays reliable at a given read depth.  Both certify
reliability with the Poisson-model lower bound, maximized over the class
threshold ``r'``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from mdsrel.bounds import BoundResult, best_retrieval_bound
from mdsrel.consensus import ConfigurationError
from mdsrel.inner_code import InnerCode, OutcomeTable, build_outcome_table
from mdsrel.montecarlo import mc_success_probability
from mdsrel.retrieval import OuterCode
from mdsrel.sequencing import SamplingSpec, sample_dirichlet

DEFAULT_R_PRIMES = tuple(range(1, 9))
SCAN_POINTS = 16
REL_RESOLUTION = 1e-3


class BracketError(RuntimeError):
    """The search interval could not be made to straddle the target."""

    def __init__(self, message, lo=None, hi=None, bound_lo=None, bound_hi=None):
        super().__init__(message)
        self.lo, self.hi, self.bound_lo, self.bound_hi = lo, hi, bound_lo, bound_hi


@dataclass(frozen=True)
class DesignPoint:
    """Inner ``(k_sym + 2t, k_sym)`` code on ``m``-bit symbols and outer ``(N, K)`` code."""

    K: int
    N: int
    k_sym: int
    t: int
    m: int = 8

    def __post_init__(self):
        if self.t < 0 or self.k_sym < 1:
            raise ConfigurationError("need k' >= 1 and t >= 0")
        if not (1 <= self.K <= self.N):
            raise ConfigurationError(f"need 1 <= K <= N, got K={self.K}, N={self.N}")

    @classmethod
    def from_rates(cls, K: int, k_sym: int, t: int, rho_out: float, m: int = 8) -> "DesignPoint":
        """``N`` is the smallest strand count with ``K / N <= rho_out``."""
        if not (0.0 < rho_out <= 1.0):
            raise ConfigurationError(f"rho_out={rho_out} outside (0, 1]")
        N = math.ceil(K / rho_out - 1e-9)
        return cls(K, N, k_sym, t, m)

    @property
    def n_sym(self) -> int:
        return self.k_sym + 2 * self.t

    @property
    def rho_in(self) -> float:
        return self.k_sym / self.n_sym

    @property
    def rho_out(self) -> float:
        return self.K / self.N

    @property
    def delta(self) -> float:
        return 2.0 * self.rho_in * self.rho_out

    @property
    def inner(self) -> InnerCode:
        return InnerCode(self.n_sym, self.k_sym, self.m)

    @property
    def outer(self) -> OuterCode:
        return OuterCode(self.N, self.K)


@dataclass(frozen=True)
class ReliabilityTarget:
    delta_th: float

    def __post_init__(self):
        if not (0.0 < self.delta_th < 1.0):
            raise ConfigurationError(f"delta_th={self.delta_th} outside (0, 1)")

    @property
    def level(self) -> float:
        return 1.0 - self.delta_th


class ReliabilityModel:
    """Bound evaluator for one design: caches the outcome table and bound values."""

    def __init__(self, design: DesignPoint, epsilon: float, probs: np.ndarray,
                 r_primes=DEFAULT_R_PRIMES, table: OutcomeTable | None = None):
        self.design = design
        self.probs = np.asarray(probs, dtype=np.float64)
        if self.probs.size != design.N:
            raise ConfigurationError(f"probability vector has {self.probs.size} entries, need N={design.N}")
        self.r_primes = tuple(r_primes)
        self.table = table or build_outcome_table(design.inner, epsilon, max(self.r_primes) + 1)
        self._cache: dict[float, BoundResult] = {}
        self.evaluations = 0

    def spec(self, lam: float) -> SamplingSpec:
        return SamplingSpec(self.probs, lam=float(lam))

    def bound(self, lam: float) -> BoundResult:
        if lam not in self._cache:
            self.evaluations += 1
            self._cache[lam] = best_retrieval_bound(self.spec(lam), self.design.outer, self.table, self.r_primes)
        return self._cache[lam]

    def meets(self, lam: float, level: float) -> BoundResult:
        """Like ``bound`` but may stop early once the answer to ``>= level`` is known."""
        self.evaluations += 1
        return best_retrieval_bound(self.spec(lam), self.design.outer, self.table, self.r_primes, level=level)


@dataclass(frozen=True)
class MinReadsResult:
    R_all: float
    depth: float
    bound: float
    path: str
    evaluations: int
    r_prime: int


def min_reads(design: DesignPoint, epsilon: float, probs, target: ReliabilityTarget,
              search: tuple[float, float] | None = None, r_primes=DEFAULT_R_PRIMES,
              max_widen: int = 24) -> MinReadsResult:
    """Smallest mean read count ``R_all`` whose bound meets the target.

    A coarse scan over the bracket checks that the bound is monotone; if so the
    crossing is refined by bisection to relative resolution 1e-3, otherwise a
    fine linear scan picks the first feasible point.
    """
    model = ReliabilityModel(design, epsilon, probs, r_primes)
    level = target.level
    lo, hi = search or (0.5 * design.N, 4.0 * design.N)
    if not (0 < lo < hi):
        raise ConfigurationError(f"invalid search interval [{lo}, {hi}]")
    widen = 0
    while model.bound(hi).bound < level:
        if widen == max_widen:
            raise BracketError(
                f"bound {model.bound(hi).bound:.6g} < {level} even at R_all={hi:.6g}",
                lo, hi, model.bound(lo).bound, model.bound(hi).bound,
            )
        lo, hi = hi, 2.0 * hi
        widen += 1
    while model.bound(lo).bound >= level:
        if widen == max_widen or lo < 1e-9:
            raise BracketError(
                f"bound already {model.bound(lo).bound:.6g} >= {level} at R_all={lo:.6g}",
                lo, hi, model.bound(lo).bound, model.bound(hi).bound,
            )
        lo, hi = 0.5 * lo, lo
        widen += 1

    grid = np.linspace(lo, hi, SCAN_POINTS)
    vals = [model.bound(float(x)).bound for x in grid]
    monotone = all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
    if monotone:
        first = next(i for i, v in enumerate(vals) if v >= level)
        a, b = float(grid[first - 1]), float(grid[first])
        while (b - a) > REL_RESOLUTION * b:
            mid = 0.5 * (a + b)
            if model.bound(mid).bound >= level:
                b = mid
            else:
                a = mid
        path = "bisection"
    else:
        step = REL_RESOLUTION * lo
        count = min(4096, math.ceil((hi - lo) / step) + 1)
        b = hi
        for x in np.linspace(lo, hi, count):
            if model.bound(float(x)).bound >= level:
                b = float(x)
                break
        path = "linear"
    res = model.bound(b)
    return MinReadsResult(b, b / design.K, res.bound, path, model.evaluations, res.r_prime)


@dataclass(frozen=True)
class DensityResult:
    feasible: bool
    delta: float = 0.0
    design: DesignPoint | None = None
    certificate: float = 0.0
    evaluations: int = 0
    certified_by: str = "bound"
    checked: list = field(default_factory=list, compare=False, repr=False)

    @property
    def rho_in(self) -> float:
        return self.design.rho_in if self.design else 0.0

    @property
    def rho_out(self) -> float:
        return self.design.rho_out if self.design else 0.0


def default_rho_out_grid(step: float = 0.005, lo: float = 0.1, hi: float = 0.995) -> np.ndarray:
    n = int(round((hi - lo) / step))
    return np.round(lo + step * np.arange(n + 1), 10)


def dirichlet_probs(xi: float, seed: int) -> Callable[[int], np.ndarray]:
    """Sampling vector for any strand count from one seeded Gamma sequence."""
    cache: dict[int, np.ndarray] = {}

    def probs(N: int) -> np.ndarray:
        if N not in cache:
            cache[N] = sample_dirichlet(N, xi, seed)
        return cache[N]

    return probs


def opt_density(K: int, k_sym: int, m: int, epsilon: float, probs_for: Callable[[int], np.ndarray],
                depth: float, target: ReliabilityTarget, t_grid=range(0, 11), rho_out_grid=None,
                r_primes=DEFAULT_R_PRIMES, exhaustive: bool = False,
                certify: str = "bound", mc_trials: int = 200, mc_seed: int = 0) -> DensityResult:
    """Highest information density that meets the target at ``R_all = depth * K``.

    For each inner radius ``t`` the outer-rate grid is walked from the top;
    the first reliable point is that radius's best density, and radii that
    cannot beat the current best are skipped.  ``exhaustive=True`` evaluates
    every grid point instead (same answer, much slower).  ``certify="mc"``
    replaces the bound with a Monte Carlo estimate; that is not conservative.
    """
    if certify not in ("bound", "mc"):
        raise ConfigurationError(f"unknown certification mode {certify!r}")
    if depth <= 0:
        raise ConfigurationError("read depth must be positive")
    grid = np.sort(np.asarray(default_rho_out_grid() if rho_out_grid is None else rho_out_grid, dtype=float))[::-1]
    lam = depth * K
    level = target.level
    best: tuple | None = None
    evaluations = 0
    checked = []
    tables: dict[int, OutcomeTable] = {}

    def key(d: DesignPoint):
        return (round(d.delta, 12), d.rho_out, d.rho_in)

    for t in sorted(t_grid):
        seen_n = set()
        for rho in grid:
            design = DesignPoint.from_rates(K, k_sym, t, float(rho), m)
            if design.N in seen_n:
                continue
            seen_n.add(design.N)
            if not exhaustive and best is not None and key(design) < key(best[0]):
                break
            if t not in tables:
                tables[t] = build_outcome_table(design.inner, epsilon, max(r_primes) + 1)
            probs = probs_for(design.N)
            if certify == "bound":
                model = ReliabilityModel(design, epsilon, probs, r_primes, tables[t])
                value = model.meets(lam, level).bound
            else:
                est = mc_success_probability(SamplingSpec(probs, lam=lam), design.outer,
                                             tables[t], mc_trials, mc_seed)
                value = est.mean
            evaluations += 1
            ok = value >= level
            checked.append((design.t, design.N, value, ok))
            if ok:
                if best is None or key(design) > key(best[0]):
                    best = (design, value)
                if not exhaustive:
                    break
    if best is None:
        return DensityResult(False, evaluations=evaluations, certified_by=certify, checked=checked)
    design, value = best
    return DensityResult(True, design.delta, design, value, evaluations, certify, checked)
