"""Monte Carlo estimators and brute-force oracles.

Every stochastic routine draws from per-trial or per-block PCG64 streams keyed
by ``(seed, purpose, index)`` and reduces results in index order, so output is
bit-identical for any worker count.
"""
from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from mdsrel.consensus import ConfigurationError
from mdsrel.inner_code import OutcomeTable
from mdsrel.retrieval import OuterCode, score_pmf
from mdsrel.sequencing import POISSON, SamplingSpec, rng_for, sample_profile

BLOCK = 65536
BRUTE_STATE_CAP = 10 ** 6

# stream tags keep unrelated draws from sharing a generator
_PROFILE, _CONSENSUS, _JOINT = 1, 2, 3


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    trials: int
    seed: int


def worker_count() -> int:
    """Worker threads from ``MDSREL_THREADS`` (0 or unset means one per CPU)."""
    raw = os.environ.get("MDSREL_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigurationError(f"MDSREL_THREADS={raw!r} is not an integer") from exc
    if n < 0:
        raise ConfigurationError("MDSREL_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


def _ordered_map(fn, items, threads: int | None = None) -> list:
    threads = worker_count() if threads is None else threads
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _bernoulli_estimate(hits: int, trials: int, seed: int) -> McEstimate:
    p = hits / trials
    return McEstimate(p, math.sqrt(p * (1.0 - p) / trials), trials, seed)


def _blocks(trials: int):
    return [(b, min(BLOCK, trials - b * BLOCK)) for b in range((trials + BLOCK - 1) // BLOCK)]


def mc_success_probability(spec: SamplingSpec, outer: OuterCode, table: OutcomeTable,
                           trials: int, seed: int, threads: int | None = None) -> McEstimate:
    """Average over sampled read profiles of the exact per-profile score tail.

    Trial ``i`` samples its profile from stream ``(seed, 1, i)``.
    """
    if trials < 1:
        raise ConfigurationError("trials must be >= 1")
    if spec.N != outer.N:
        raise ConfigurationError(f"sampling vector has {spec.N} strands, code has N={outer.N}")
    profiles = [sample_profile(spec, rng=rng_for(seed, _PROFILE, i)) for i in range(trials)]
    top = max(int(p.max()) for p in profiles)
    table = table.extended(top)

    def one(profile):
        return score_pmf(profile, table, outer.K).success_prob

    vals = np.array(_ordered_map(one, profiles, threads))
    sd = float(vals.std(ddof=1)) if trials > 1 else 0.0
    mean = float(vals.mean())
    if mean > 0.5:
        # average the (exactly representable) failure probabilities instead,
        # so a mean within a few ulps of 1 is rounded correctly
        mean = 1.0 - float((1.0 - vals).mean())
    return McEstimate(mean, sd / math.sqrt(trials), trials, seed)


def simulate_consensus(epsilon: float, r: int, trials: int, seed: int,
                       threads: int | None = None) -> McEstimate:
    """Empirical error rate of majority voting over ``r`` noisy copies of one base."""
    if r < 1:
        raise ConfigurationError("simulate_consensus needs r >= 1")
    if not (0.0 <= epsilon <= 1.0):
        raise ConfigurationError(f"epsilon={epsilon} outside [0, 1]")

    def block(args):
        b, size = args
        rng = rng_for(seed, _CONSENSUS, b)
        wrong = rng.random((size, r)) < epsilon
        letters = np.where(wrong, 1 + rng.integers(0, 3, (size, r)), 0)
        counts = np.zeros((size, 4))
        for col in range(r):
            counts[np.arange(size), letters[:, col]] += 1
        # jitter below 1 breaks ties uniformly without touching strict winners
        winner = np.argmax(counts + rng.random((size, 4)) * 0.5, axis=1)
        return int(np.count_nonzero(winner != 0))

    hits = sum(_ordered_map(block, _blocks(trials), threads))
    return _bernoulli_estimate(hits, trials, seed)


@dataclass(frozen=True)
class BruteInner:
    alpha: float
    beta: float
    gamma: float
    eta: dict[int, float]
    weights: list[int]


def grs_codewords(n: int, k: int, q: int) -> np.ndarray:
    """All codewords of a Reed-Solomon code over GF(q), q prime, points 1..n."""
    if not _is_prime(q):
        raise ConfigurationError(f"brute-force codes need a prime field, got q={q}")
    if n > q - 1:
        raise ConfigurationError(f"need n <= q - 1 distinct nonzero points, got n={n}, q={q}")
    x = np.arange(1, n + 1)
    gen = np.array([pow(int(v), i, q) for i in range(k) for v in x]).reshape(k, n)
    msgs = np.array(list(itertools.product(range(q), repeat=k)), dtype=np.int64)
    return (msgs @ gen) % q


def _is_prime(q: int) -> bool:
    return q >= 2 and all(q % d for d in range(2, int(math.isqrt(q)) + 1))


def brute_force_inner(n: int, k: int, q: int, eps_sym: float) -> BruteInner:
    """Exhaustive BDD over every error pattern of a small prime-field RS code.

    The zero codeword is sent (the code is linear and the channel symmetric).
    A pattern decodes correctly if it lies within ``t`` of zero, is a
    miscorrection if it lies within ``t`` of another codeword, and fails
    otherwise.
    """
    if (n - k) % 2:
        raise ConfigurationError("n - k must be even")
    if q ** n > BRUTE_STATE_CAP:
        raise ConfigurationError(f"q^n = {q ** n} exceeds the brute-force cap {BRUTE_STATE_CAP}")
    t = (n - k) // 2
    code = grs_codewords(n, k, q)
    weights = np.bincount(np.count_nonzero(code, axis=1), minlength=n + 1).tolist()
    nonzero = code[np.any(code != 0, axis=1)]
    patterns = np.array(list(itertools.product(range(q), repeat=n)), dtype=np.int64)
    w = np.count_nonzero(patterns, axis=1)
    near_other = np.zeros(patterns.shape[0], dtype=bool)
    for cw in nonzero:
        near_other |= np.count_nonzero(patterns != cw, axis=1) <= t
    ok = w <= t
    mis = near_other & ~ok
    if eps_sym == 0.0:
        prob = (w == 0).astype(np.float64)
    else:
        prob = (1.0 - eps_sym) ** (n - w) * (eps_sym / (q - 1)) ** w
    alpha = float(prob[ok].sum())
    beta = float(prob[mis].sum())
    gamma = float(prob[~ok & ~mis].sum())
    eta = {i: float(np.count_nonzero(mis & (w == i)) / np.count_nonzero(w == i)) for i in range(t + 1, n + 1)}
    return BruteInner(alpha, beta, gamma, eta, weights)


def brute_force_score(profile, table: OutcomeTable, K: int) -> float:
    """``Pr(S_N >= K)`` by summing over all ``3^N`` outcome vectors."""
    profile = [int(r) for r in profile]
    if len(profile) > 8:
        raise ConfigurationError("brute-force score enumeration is capped at N = 8")
    rows = [table.row(r) for r in profile]
    total = 0.0
    for outcome in itertools.product((0, 1, 2), repeat=len(profile)):
        score = sum((1, -1, 0)[o] for o in outcome)
        if score >= K:
            total += math.prod(row[o] for row, o in zip(rows, outcome))
    return total


def mc_joint_frequency(spec: SamplingSpec, r_prime: int, trials: int, seed: int,
                       threads: int | None = None) -> np.ndarray:
    """Empirical ``Pr(H_0 = a, H~_r' = b)`` as an ``(N+1, N+1)`` array."""
    if spec.model != POISSON:
        raise ConfigurationError("mc_joint_frequency samples the Poisson model")
    N = spec.N
    mu = spec.lam * spec.probs

    def block(args):
        b, size = args
        reads = rng_for(seed, _JOINT, b).poisson(mu, (size, N))
        h0 = np.count_nonzero(reads == 0, axis=1)
        hp = np.count_nonzero(reads <= r_prime, axis=1)
        return np.bincount(h0 * (N + 1) + hp, minlength=(N + 1) ** 2)

    counts = np.zeros((N + 1) ** 2, dtype=np.int64)
    for c in _ordered_map(block, _blocks(trials), threads):
        counts += c
    return counts.reshape(N + 1, N + 1) / trials


def poisson_binomial_pmf(q) -> np.ndarray:
    """Exact PMF of a sum of independent Bernoulli(q_j) variables."""
    pmf = np.ones(1)
    for p in np.asarray(q, dtype=np.float64):
        nxt = np.zeros(pmf.size + 1)
        nxt[:-1] += (1.0 - p) * pmf
        nxt[1:] += p * pmf
        pmf = nxt
    return pmf
