import numpy as np
import pytest
from conftest import random_table
from hypothesis import given, settings
from hypothesis import strategies as st

from mdsrel.consensus import ConfigurationError
from mdsrel.montecarlo import brute_force_score
from mdsrel.retrieval import (
    OuterCode,
    clt_success_approx,
    score_moments,
    score_pmf,
    score_pmf_naive,
    score_pmf_uniform,
    success_condition_check,
)


def test_outer_code_validation():
    assert OuterCode(10526, 10000).M == 14
    with pytest.raises(ConfigurationError):
        OuterCode(10, 11)
    with pytest.raises(ConfigurationError):
        OuterCode(300, 100, M=8)


def test_single_strand(storage_table):
    d = score_pmf([5], storage_table, 1, tail_eps=0.0)
    a, b, g = storage_table.row(5)
    assert d.pmf.offset == -1
    assert d.pmf.mass.tolist() == pytest.approx([b, g, a], abs=1e-15)


def test_two_strands_formula():
    rng = np.random.default_rng(0)
    t = random_table(rng, 4)
    (a1, b1, g1), (a2, b2, g2) = t.row(1), t.row(3)
    d = score_pmf([1, 3], t, 1, tail_eps=0.0)
    assert d.success_prob == pytest.approx(a1 * a2 + a1 * g2 + g1 * a2, abs=1e-15)


@pytest.mark.parametrize("seed", range(20))
def test_matches_enumeration_for_small_n(seed):
    rng = np.random.default_rng(100 + seed)
    table = random_table(rng, 6)
    for n in range(1, 9):
        prof = rng.integers(0, 7, n)
        d = score_pmf(prof, table, tail_eps=0.0)
        for K in range(-n, n + 1):
            assert d.pmf.tail(K) == pytest.approx(brute_force_score(prof, table, K), abs=1e-12)


@pytest.mark.parametrize("seed", range(20))
def test_grouped_equals_naive(seed, storage_table):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 201))
    table = storage_table if seed % 2 else random_table(rng, 8)
    prof = rng.integers(0, min(table.r_max, 8) + 1, n)
    fast = score_pmf(prof, table, tail_eps=0.0).pmf
    slow = score_pmf_naive(prof, table).pmf
    dense = np.zeros(2 * n + 1)
    dense[fast.offset + n: fast.offset + n + fast.mass.size] = fast.mass
    assert np.max(np.abs(dense - slow.mass)) <= 1e-12


def test_truncation_is_reported_and_conservative(storage_table):
    rng = np.random.default_rng(9)
    prof = rng.poisson(3, 2000)
    exact = score_pmf(prof, storage_table, 1900, tail_eps=0.0)
    trunc = score_pmf(prof, storage_table, 1900)
    assert trunc.pmf.mass.size < exact.pmf.mass.size
    assert 0 < trunc.truncation_loss <= 2e-15
    assert trunc.success_prob <= exact.success_prob + 1e-15
    assert exact.success_prob - trunc.success_prob <= trunc.truncation_loss + 1e-15
    assert trunc.pmf.truncated


def test_read_count_above_table(storage_table):
    with pytest.raises(ConfigurationError):
        score_pmf([1, 51], storage_table)


def test_uniform_closed_form():
    rng = np.random.default_rng(5)
    table = random_table(rng, 4)
    for n in (1, 2, 7, 30, 150):
        for r in (0, 1, 3):
            closed = score_pmf_uniform(n, r, table).pmf
            dp = score_pmf(np.full(n, r), table, tail_eps=0.0).pmf
            dense = np.zeros(2 * n + 1)
            dense[dp.offset + n: dp.offset + n + dp.mass.size] = dp.mass
            assert np.max(np.abs(closed.mass - dense)) <= 1e-12
    a = table.alpha[2]
    assert score_pmf_uniform(9, 2, table).pmf.at(9) == pytest.approx(a ** 9, rel=1e-12)


def test_uniform_closed_form_six_strands():
    from mdsrel.inner_code import OutcomeTable

    table = OutcomeTable.from_rows([[0, 0, 1], [0.5, 0.2, 0.3]])
    pmf = score_pmf_uniform(6, 1, table).pmf
    for s in range(-6, 7):
        brute = brute_force_score([1] * 6, table, s) - brute_force_score([1] * 6, table, s + 1)
        assert pmf.at(s) == pytest.approx(brute, abs=1e-12)


def test_success_condition():
    outer = OuterCode(20, 13)
    assert success_condition_check(0, 0, outer)
    assert success_condition_check(7, 0, outer)
    assert not success_condition_check(8, 0, outer)
    rng = np.random.default_rng(1)
    for _ in range(100):
        e_era = int(rng.integers(0, 21))
        e_sub = int(rng.integers(0, 21 - e_era))
        score = (outer.N - e_era - e_sub) - e_sub
        assert success_condition_check(e_era, e_sub, outer) == (score >= outer.K)
    with pytest.raises(ValueError):
        success_condition_check(15, 10, outer)


def test_clt_degenerate_branch(storage_table):
    assert clt_success_approx(np.zeros(50, int), storage_table, 1) == (0.0, 0.0)
    assert clt_success_approx(np.zeros(50, int), storage_table, 0) == (1.0, 0.0)


def test_moments_against_direct_computation(storage_table):
    rng = np.random.default_rng(6)
    for _ in range(50):
        prof = rng.integers(0, 10, int(rng.integers(1, 300)))
        d = score_pmf(prof, storage_table, tail_eps=0.0).pmf
        s = d.support
        mu_direct = float(np.dot(s, d.mass))
        var_direct = float(np.dot((s - mu_direct) ** 2, d.mass))
        mu, var, _ = score_moments(storage_table.alpha[prof], storage_table.beta[prof], storage_table.gamma[prof])
        assert mu == pytest.approx(mu_direct, abs=1e-9)
        assert var == pytest.approx(var_direct, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(1, 9).map(lambda x: 2 * (x // 2) + 1), min_size=1, max_size=60), st.data())
def test_more_reads_on_odd_counts_never_hurt(prof, data):
    from mdsrel.inner_code import InnerCode, build_outcome_table

    table = build_outcome_table(InnerCode(49, 45), 0.02, 12)
    prof = np.array(prof)
    j = data.draw(st.integers(0, prof.size - 1))
    K = data.draw(st.integers(-prof.size, prof.size))
    bumped = prof.copy()
    bumped[j] += 2
    base = score_pmf(prof, table, K, tail_eps=0.0).success_prob
    assert score_pmf(bumped, table, K, tail_eps=0.0).success_prob >= base - 1e-12


def test_near_certain_success_keeps_precision(storage_table):
    prof = np.full(10_000, 10)
    assert score_pmf(prof, storage_table, 5_000).success_prob == 1.0
    mixed = np.full(10_000, 2)
    pmf = score_pmf(mixed, storage_table).pmf
    K = int(pmf.support[np.searchsorted(-np.cumsum(pmf.mass[::-1])[::-1], -1e-6)])
    low = score_pmf(mixed, storage_table, K)
    assert 0.0 < low.success_prob < 1e-5
    assert low.success_prob == pytest.approx(low.pmf.tail(K), rel=1e-12)
