"""Cross-checks of each analytical routine against an independent computation.

Each suite returns ``OracleResult`` records; ``run_all`` is what the
``oracle`` subcommand executes.  Stochastic checks use fixed seeds.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mdsrel.bounds import BoundConfig, joint_freq_pmf, retrieval_bound
from mdsrel.consensus import consensus_error_rate, consensus_success_enumerated
from mdsrel.inner_code import InnerCode, OutcomeTable, mds_weight_distribution, miscorrection_fractions, outcome_probs
from mdsrel.montecarlo import (
    brute_force_inner,
    brute_force_score,
    mc_joint_frequency,
    poisson_binomial_pmf,
    simulate_consensus,
)
from mdsrel.retrieval import OuterCode, score_pmf, score_pmf_uniform
from mdsrel.sequencing import SamplingSpec


@dataclass(frozen=True)
class OracleResult:
    suite: str
    error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.error <= self.tolerance


def random_table(rng: np.random.Generator, r_max: int) -> OutcomeTable:
    rows = rng.dirichlet(np.ones(3), size=r_max + 1)
    rows[0] = (0.0, 0.0, 1.0)
    rows /= rows.sum(axis=1, keepdims=True)
    return OutcomeTable.from_rows(rows)


def consensus_suite() -> list[OracleResult]:
    err = 0.0
    for eps in (0.001, 0.01, 0.1, 0.3):
        for r in range(1, 13):
            err = max(err, abs(consensus_error_rate(eps, r) - (1.0 - consensus_success_enumerated(eps, r))))
    out = [OracleResult("consensus: regrouped sum vs tally enumeration", err, 1e-12)]
    worst = 0.0
    for eps, r in ((0.05, 3), (0.1, 5)):
        est = simulate_consensus(eps, r, 200_000, seed=11)
        worst = max(worst, abs(est.mean - consensus_error_rate(eps, r)) / est.stderr)
    out.append(OracleResult("consensus: Monte Carlo (z-score)", worst, 4.0))
    return out


def inner_suite() -> list[OracleResult]:
    err = 0.0
    for n, k, q in ((3, 1, 5), (4, 2, 5), (5, 3, 7)):
        code = InnerCode(n, k, q=q)
        for eps in (0.05, 0.2):
            brute = brute_force_inner(n, k, q, eps)
            a, b, g = outcome_probs(code, eps)
            err = max(err, abs(a - brute.alpha), abs(b - brute.beta), abs(g - brute.gamma))
            eta = miscorrection_fractions(code)
            err = max(err, max(abs(eta[i] - v) for i, v in brute.eta.items()))
        err = max(err, max(abs(x - y) for x, y in zip(mds_weight_distribution(code), brute.weights)))
    return [OracleResult("inner: BDD outcomes vs exhaustive decoding", err, 1e-12)]


def score_suite() -> list[OracleResult]:
    rng = np.random.default_rng(3)
    err = 0.0
    for _ in range(5):
        table = random_table(rng, 6)
        for n in range(1, 7):
            prof = rng.integers(0, 7, n)
            d = score_pmf(prof, table, 0, tail_eps=0.0)
            for K in range(-n, n + 1):
                err = max(err, abs(d.pmf.tail(K) - brute_force_score(prof, table, K)))
    out = [OracleResult("score: recurrence vs 3^N enumeration", err, 1e-12)]
    err = 0.0
    for _ in range(5):
        table = random_table(rng, 4)
        for n in (1, 5, 40):
            a = score_pmf_uniform(n, 3, table).pmf
            b = score_pmf(np.full(n, 3), table, tail_eps=0.0).pmf
            err = max(err, float(np.max(np.abs(a.mass - b.mass))))
    out.append(OracleResult("score: trinomial closed form vs recurrence", err, 1e-12))
    return out


def bound_suite() -> list[OracleResult]:
    N, lam, r_prime = 12, 30.0, 2
    spec = SamplingSpec.uniform(N, lam=lam)
    jf = joint_freq_pmf(spec, r_prime)
    emp = mc_joint_frequency(spec, r_prime, 200_000, seed=5)
    model = np.zeros_like(emp)
    model[jf.off0:jf.off0 + jf.grid.shape[0], jf.off1:jf.off1 + jf.grid.shape[1]] = jf.grid
    se = np.sqrt(np.maximum(model * (1 - model), 1e-300) / 200_000)
    z = np.max(np.abs(emp - model)[model > 0] / se[model > 0])
    zero_cells = np.abs(emp[model == 0]).max(initial=0.0)
    out = [
        OracleResult("joint frequencies vs Monte Carlo (z-score)", float(z), 4.5),
        OracleResult("joint frequencies: empirical mass outside support", float(zero_cells), 0.0),
    ]
    exact = poisson_binomial_pmf(np.exp(-lam * spec.probs))
    marg = jf.marginal_h0()
    diff = max(abs(marg.at(h) - exact[h]) for h in range(N + 1))
    out.append(OracleResult("joint frequencies: H_0 marginal vs Bernoulli-sum DP", diff, jf.mass_deficit + 1e-12))

    rng = np.random.default_rng(8)
    err = 0.0
    for n, k in ((30, 20), (120, 100)):
        table = random_table(rng, 6)
        for lam in (0.5 * n, 3.0 * n):
            s = SamplingSpec(rng.dirichlet(np.full(n, 3.0)), lam=lam)
            outer = OuterCode(n, k)
            j = retrieval_bound(s, outer, table, BoundConfig(r_prime=2, method="joint"))
            m = retrieval_bound(s, outer, table, BoundConfig(r_prime=2, method="mixture"))
            err = max(err, abs(j.bound - m.bound) - j.mass_deficit - m.mass_deficit)
    out.append(OracleResult("bound: tally-state average vs strand mixture", max(err, 0.0), 1e-12))
    return out


SUITES = (consensus_suite, inner_suite, score_suite, bound_suite)


def run_all() -> list[OracleResult]:
    results: list[OracleResult] = []
    for suite in SUITES:
        results.extend(suite())
    return results


def format_result(res: OracleResult) -> str:
    status = "ok" if res.passed else "FAIL"
    err = "0" if res.error == 0 else f"{res.error:.3e}"
    tol = "0" if res.tolerance == 0 else f"{res.tolerance:.1e}"
    return f"{status:4s} {res.suite}: {err} (tolerance {tol})"

