import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mdsrel.consensus import ConfigurationError
from mdsrel.inner_code import (
    InnerCode,
    OutcomeTable,
    _miscorrection_counts,
    build_outcome_table,
    mds_weight_distribution,
    miscorrection_fraction,
    miscorrection_fractions,
    outcome_probs,
)
from mdsrel.montecarlo import brute_force_inner, grs_codewords

SMALL_CODES = [(3, 1, 5), (4, 2, 5), (5, 3, 7), (5, 1, 7), (6, 2, 7), (4, 4, 5), (6, 4, 7)]


def test_code_validation():
    c = InnerCode(49, 45, 8)
    assert (c.q, c.t, c.d_min) == (256, 2, 5)
    with pytest.raises(ConfigurationError):
        InnerCode(48, 45)
    with pytest.raises(ConfigurationError):
        InnerCode(6, 2, q=5)
    with pytest.raises(ConfigurationError):
        InnerCode(4, 5, q=5)


def test_weight_distribution_examples():
    w = mds_weight_distribution(InnerCode(3, 1, q=4))
    assert w == [1, 0, 0, 3] and sum(w) == 4
    assert sum(mds_weight_distribution(InnerCode(4, 2, q=5))) == 25


@pytest.mark.parametrize("n, k, q", SMALL_CODES)
def test_weight_distribution_matches_codeword_tally(n, k, q):
    code = grs_codewords(n, k, q)
    tally = np.bincount(np.count_nonzero(code, axis=1), minlength=n + 1).tolist()
    assert mds_weight_distribution(InnerCode(n, k, q=q)) == tally


@pytest.mark.parametrize("n, k, m", [(49, 45, 8), (47, 45, 8), (45, 45, 8), (255, 223, 8), (30, 10, 6)])
def test_weight_distribution_sums_to_code_size(n, k, m):
    w = mds_weight_distribution(InnerCode(n, k, m))
    assert w[0] == 1 and all(x >= 0 for x in w)
    assert all(x == 0 for x in w[1:n - k + 1])
    assert sum(w) == (2 ** m) ** k


@pytest.mark.parametrize("n, k, q", [c for c in SMALL_CODES if c[0] > c[1]])
def test_eta_matches_exhaustive_decoding(n, k, q):
    brute = brute_force_inner(n, k, q, 0.1)
    code = InnerCode(n, k, q=q)
    for i, value in brute.eta.items():
        assert miscorrection_fraction(code, i) == pytest.approx(value, abs=1e-12)
        assert 0.0 < miscorrection_fraction(code, i) < 1.0


def test_eta_domain():
    code = InnerCode(4, 2, q=5)
    with pytest.raises(ValueError):
        miscorrection_fraction(code, 1)
    with pytest.raises(ConfigurationError):
        miscorrection_fraction(InnerCode(4, 4, q=5), 2)


@pytest.mark.parametrize("n, k, m", [(49, 45, 8), (53, 45, 8), (65, 45, 8)])
def test_sphere_packing(n, k, m):
    code = InnerCode(n, k, m)
    for hits, total in _miscorrection_counts(code.n_sym, code.k_sym, code.q):
        assert 0 <= hits <= total
    eta = miscorrection_fractions(code)
    assert np.all((eta[code.t + 1:] > 0) & (eta[code.t + 1:] < 1))


@pytest.mark.parametrize("eps", [0.0, 0.05, 0.2, 0.6])
@pytest.mark.parametrize("n, k, q", SMALL_CODES)
def test_outcomes_match_exhaustive_decoding(n, k, q, eps):
    brute = brute_force_inner(n, k, q, eps)
    a, b, g = outcome_probs(InnerCode(n, k, q=q), eps)
    assert a == pytest.approx(brute.alpha, abs=1e-12)
    assert b == pytest.approx(brute.beta, abs=1e-12)
    assert g == pytest.approx(brute.gamma, abs=1e-12)


def test_outcome_special_cases():
    assert outcome_probs(InnerCode(49, 45), 0.0) == (1.0, 0.0, 0.0)
    e = 0.03
    a, b, g = outcome_probs(InnerCode(45, 45), e)
    assert a == pytest.approx((1 - e) ** 45, abs=1e-15)
    assert b == pytest.approx(1 - (1 - e) ** 45, abs=1e-12)
    assert g == 0.0


def test_single_read_success_is_binomial_cdf(storage_code):
    es = Fraction(1) - Fraction(99, 100) ** 4
    exact = sum(math.comb(49, i) * es ** i * (1 - es) ** (49 - i) for i in range(3))
    table = build_outcome_table(storage_code, 0.01, 1)
    assert table.alpha[1] == pytest.approx(float(exact), abs=1e-12)


def test_single_read_alpha_against_sampling(storage_code):
    rng = np.random.default_rng(4)
    eps_sym = 1 - 0.99 ** 4
    weights = rng.binomial(49, eps_sym, size=1_000_000)
    emp = np.mean(weights <= 2)
    se = math.sqrt(emp * (1 - emp) / weights.size)
    a, _, _ = outcome_probs(storage_code, eps_sym)
    assert abs(a - emp) <= 4 * se


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 1), st.sampled_from([(49, 45, 8), (45, 45, 8), (57, 45, 8), (15, 11, 4)]))
def test_outcomes_sum_to_one(eps, params):
    a, b, g = outcome_probs(InnerCode(*params), eps)
    assert min(a, b, g) >= 0.0
    assert a + b + g == pytest.approx(1.0, abs=1e-12)


def test_table_structure(storage_code, storage_table):
    t = storage_table
    assert t.r_max == 50
    assert t.row(0) == (0.0, 0.0, 1.0)
    assert np.all(np.abs(t.alpha + t.beta + t.gamma - 1) <= 1e-12)
    odd = t.alpha[1::2]
    assert np.all(np.diff(odd) >= -1e-15)
    noiseless = build_outcome_table(storage_code, 0.0, 1)
    assert noiseless.row(0) == (0.0, 0.0, 1.0) and noiseless.row(1) == (1.0, 0.0, 0.0)


def test_alpha_rises_like_a_sigmoid(storage_table):
    a = storage_table.alpha
    jumps = np.diff(a[:12])
    # flat start (r = 0 -> 1 aside), one dominant jump, then saturation
    assert np.argmax(jumps[1:]) + 1 == 2
    assert a[3] - a[2] > 0.3
    assert a[11] > 1 - 1e-12


def test_table_extension(storage_code):
    t = build_outcome_table(storage_code, 0.01, 5)
    big = t.extended(9)
    assert big.r_max == 9 and np.array_equal(big.alpha[:6], t.alpha)
    assert t.extended(3) is t
    bare = OutcomeTable.from_rows(np.array([[0, 0, 1], [0.5, 0.1, 0.4]]))
    with pytest.raises(ConfigurationError):
        bare.extended(4)
    with pytest.raises(ValueError):
        OutcomeTable.from_rows(np.array([[0, 0, 1], [0.5, 0.1, 0.3]]))
    with pytest.raises(ConfigurationError):
        build_outcome_table(storage_code, 0.01, 0)
