"""Read-profile sampling (multinomial, Poisson, Dirichlet-biased) and read tallies.

All randomness flows through numpy's PCG64 generator seeded with a
``SeedSequence`` built from ``(seed, stream_index)``, so every trial has its
own reproducible stream regardless of how trials are scheduled.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from mdsrel.consensus import ConfigurationError

RNG_NAME = "numpy.PCG64 via SeedSequence([seed, stream])"
MULTINOMIAL = "multinomial"
POISSON = "poisson"


def rng_for(seed: int, *stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *map(int, stream)])))


def _check_probs(p) -> np.ndarray:
    p = np.ascontiguousarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise ConfigurationError("probability vector must be non-empty and 1-D")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ConfigurationError("probabilities must be finite and non-negative")
    if abs(p.sum() - 1.0) > 1e-12:
        raise ConfigurationError(f"probabilities sum to {p.sum()!r}, not 1")
    return p


@dataclass(frozen=True)
class SamplingSpec:
    """How reads are drawn: ``probs`` over ``N`` strands and either a fixed
    total ``R_all`` (multinomial) or a Poisson total with mean ``lam``."""

    probs: np.ndarray
    model: str = POISSON
    R_all: int | None = None
    lam: float | None = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "probs", _check_probs(self.probs))
        if self.model == MULTINOMIAL:
            if self.R_all is None or self.R_all < 0:
                raise ConfigurationError("multinomial model needs R_all >= 0")
        elif self.model == POISSON:
            if self.lam is None or self.lam < 0:
                raise ConfigurationError("poisson model needs lam >= 0")
        else:
            raise ConfigurationError(f"unknown sampling model {self.model!r}")

    @property
    def N(self) -> int:
        return self.probs.size

    @property
    def mean_reads(self) -> float:
        return float(self.R_all if self.model == MULTINOMIAL else self.lam)

    def poissonized(self) -> "SamplingSpec":
        """Poisson model with ``lam = R_all``; Poisson specs are returned unchanged."""
        if self.model == POISSON:
            return self
        return SamplingSpec(self.probs, POISSON, lam=float(self.R_all), seed=self.seed)

    @classmethod
    def dirichlet(cls, N: int, xi: float, seed: int, **kw) -> "SamplingSpec":
        return cls(sample_dirichlet(N, xi, seed), seed=seed, **kw)

    @classmethod
    def uniform(cls, N: int, **kw) -> "SamplingSpec":
        return cls(np.full(N, 1.0 / N), **kw)


@dataclass(frozen=True)
class ReadFrequency:
    h: np.ndarray
    h_cum: np.ndarray

    def at_most(self, r: int) -> int:
        if r < 0:
            return 0
        return int(self.h_cum[min(r, self.h_cum.size - 1)])


def sample_dirichlet(N: int, xi: float, seed: int) -> np.ndarray:
    """Symmetric Dirichlet draw: normalized ``Gamma(xi, 1)`` variates."""
    if N < 1:
        raise ConfigurationError("N must be at least 1")
    if not xi > 0:
        raise ConfigurationError(f"Dirichlet concentration must be positive, got {xi}")
    g = rng_for(seed, 0).standard_gamma(xi, N)
    total = g.sum()
    if total == 0.0:
        # all variates underflowed (tiny xi); fall back to a corner of the simplex
        g = np.zeros(N)
        g[0] = total = 1.0
    p = g / total
    # absorb rounding so the vector sums to one as tightly as possible
    p[np.argmax(p)] += 1.0 - p.sum()
    return p


def sample_profile(spec: SamplingSpec, trial_index: int = 0, rng: np.random.Generator | None = None) -> np.ndarray:
    """One read profile; trial ``i`` always draws from stream ``(seed, 1, i)``."""
    rng = rng or rng_for(spec.seed, 1, trial_index)
    if spec.model == MULTINOMIAL:
        # numpy's multinomial walks the conditional binomials internally
        return rng.multinomial(spec.R_all, spec.probs).astype(np.int64)
    return rng.poisson(spec.lam * spec.probs).astype(np.int64)


def read_frequency(profile) -> ReadFrequency:
    profile = np.asarray(profile, dtype=np.int64)
    if profile.ndim != 1 or np.any(profile < 0):
        raise ConfigurationError("read profile must be a 1-D array of non-negative counts")
    h = np.bincount(profile, minlength=1) if profile.size else np.zeros(1, dtype=np.int64)
    return ReadFrequency(h, np.cumsum(h))


def load_probabilities(path) -> np.ndarray:
    """Read one probability per line; blank lines and ``#`` comments are skipped."""
    values = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            try:
                values.append(float(line))
            except ValueError as exc:
                raise ConfigurationError(f"{path}: bad probability {line!r}") from exc
    p = np.asarray(values, dtype=np.float64)
    if p.size and abs(p.sum() - 1.0) <= 1e-6:
        # text files carry rounded values; renormalize small drift only
        p = p / p.sum()
    return _check_probs(p)
