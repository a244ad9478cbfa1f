import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mdsrel.consensus import (
    R_ENUM_CAP,
    ConfigurationError,
    consensus_error_rate,
    consensus_rates,
    consensus_success_enumerated,
    enumerate_tally_vectors,
    symbol_error_rate,
)
from mdsrel.montecarlo import simulate_consensus


def brute_force_error(eps, r):
    """Sum over every read sequence, splitting ties evenly."""
    probs = [1 - eps, eps / 3, eps / 3, eps / 3]
    err = 0.0
    for reads in itertools.product(range(4), repeat=r):
        counts = np.bincount(reads, minlength=4)
        top = counts.max()
        winners = np.flatnonzero(counts == top)
        p_wrong = 1.0 - (1.0 / len(winners) if 0 in winners else 0.0)
        err += math.prod(probs[x] for x in reads) * p_wrong
    return err


def test_tally_vectors_small_cases():
    assert enumerate_tally_vectors(0) == []
    assert enumerate_tally_vectors(1) == [((1, 0, 0, 0), 1)]
    assert sorted(enumerate_tally_vectors(2)) == sorted(
        [((2, 0, 0, 0), 1), ((1, 1, 0, 0), 2), ((1, 0, 1, 0), 2), ((1, 0, 0, 1), 2)]
    )
    assert len(enumerate_tally_vectors(3)) == 7


@pytest.mark.parametrize("r", range(1, 9))
def test_tally_vectors_match_composition_filter(r):
    expected = {
        k for k in itertools.product(range(r + 1), repeat=4)
        if sum(k) == r and k[0] >= max(k[1:])
    }
    got = enumerate_tally_vectors(r)
    assert {k for k, _ in got} == expected
    for k, omega in got:
        assert omega == sum(1 for x in k if x == k[0])


@pytest.mark.parametrize("eps", [0.001, 0.01, 0.1])
def test_one_and_two_reads_keep_channel_rate(eps):
    assert consensus_error_rate(eps, 1) == pytest.approx(eps, abs=1e-12)
    assert consensus_error_rate(eps, 2) == pytest.approx(eps, abs=1e-12)


def test_three_reads_closed_form():
    eps = 0.01
    closed = 1 - ((1 - eps) ** 3 + 3 * eps * (1 - eps) ** 2 + (2 / 3) * eps ** 2 * (1 - eps))
    assert consensus_error_rate(eps, 3) == pytest.approx(closed, abs=1e-12)
    assert consensus_error_rate(eps, 3) == pytest.approx(2.32e-4, abs=1e-12)


@pytest.mark.parametrize("eps", [0.03, 0.2])
@pytest.mark.parametrize("r", range(1, 8))
def test_matches_read_sequence_enumeration(eps, r):
    assert consensus_error_rate(eps, r) == pytest.approx(brute_force_error(eps, r), abs=1e-12)


@pytest.mark.parametrize("eps", [0.001, 0.05, 0.25, 0.5])
@pytest.mark.parametrize("r", [1, 4, 9, 16, 30])
def test_total_probability(eps, r):
    assert consensus_success_enumerated(eps, r) + consensus_error_rate(eps, r) == pytest.approx(1.0, abs=1e-12)


@given(st.floats(1e-6, 0.74))
def test_two_reads_are_tie_neutral(eps):
    assert consensus_error_rate(eps, 2) == pytest.approx(eps, abs=1e-12)


@given(st.floats(1e-4, 0.5))
def test_majority_never_hurts_and_improves_over_odd_r(eps):
    vals = [consensus_error_rate(eps, r) for r in range(1, 26, 2)]
    assert all(v <= eps + 1e-15 for v in vals)
    assert all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))


def test_edge_cases_and_cap():
    assert consensus_error_rate(0.01, 0) is None
    assert consensus_error_rate(0.0, 7) == 0.0
    assert consensus_error_rate(0.1, R_ENUM_CAP + 100) == consensus_error_rate(0.1, R_ENUM_CAP)
    assert consensus_error_rate(0.1, R_ENUM_CAP) < 1e-15
    with pytest.raises(ConfigurationError):
        consensus_error_rate(1.5, 3)
    with pytest.raises(ConfigurationError):
        consensus_rates(0.01, 0, 8)


def test_symbol_error_rate():
    assert symbol_error_rate(0.0, 8) == 0.0
    assert symbol_error_rate(0.0123, 2) == pytest.approx(0.0123, abs=1e-15)
    assert symbol_error_rate(0.01, 8) == pytest.approx(1 - 0.99 ** 4, abs=1e-15)
    assert symbol_error_rate(0.01, 8) == pytest.approx(0.03940399, abs=1e-12)
    with pytest.raises(ConfigurationError):
        symbol_error_rate(0.01, 7)


@given(st.floats(0, 1), st.sampled_from([2, 4, 6, 8, 10, 16]))
def test_symbol_error_rate_formula(eps_r, m):
    assert symbol_error_rate(eps_r, m) == pytest.approx(1 - (1 - eps_r) ** (m // 2), abs=1e-12)


def test_rates_record():
    rates = consensus_rates(0.01, 3, 8)
    assert rates.eps_r == pytest.approx(2.32e-4)
    assert rates.eps_sym_r == pytest.approx(1 - (1 - 2.32e-4) ** 4, abs=1e-12)


@pytest.mark.parametrize("r", [1, 3])
def test_simulation_passthrough_and_noiseless(r):
    assert simulate_consensus(0.0, r, 10_000, seed=1).mean == 0.0
    est = simulate_consensus(0.2, 1, 100_000, seed=2)
    assert abs(est.mean - 0.2) <= 4 * est.stderr
