import numpy as np
import pytest

from mdsrel.bounds import best_retrieval_bound
from mdsrel.consensus import ConfigurationError
from mdsrel.inner_code import build_outcome_table
from mdsrel.optimizer import (
    BracketError,
    DesignPoint,
    ReliabilityModel,
    ReliabilityTarget,
    default_rho_out_grid,
    dirichlet_probs,
    min_reads,
    opt_density,
)
from mdsrel.sequencing import SamplingSpec, sample_dirichlet

K_SMALL = 400
TARGET = ReliabilityTarget(1e-6)


def test_design_point():
    d = DesignPoint.from_rates(10000, 45, 2, 0.95)
    assert d.N == 10527 and d.n_sym == 49
    assert d.delta == pytest.approx(2 * 45 / 49 * 10000 / 10527)
    assert DesignPoint.from_rates(10000, 45, 0, 0.5).N == 20000
    with pytest.raises(ConfigurationError):
        DesignPoint.from_rates(100, 45, 0, 0.0)
    with pytest.raises(ConfigurationError):
        DesignPoint(10, 9, 45, 0)
    with pytest.raises(ConfigurationError):
        ReliabilityTarget(0.0)


def test_rho_out_grid():
    g = default_rho_out_grid()
    assert g[0] == 0.1 and g[-1] == 0.995 and g.size == 180


def test_dirichlet_probs_cached():
    f = dirichlet_probs(3.0, 2024)
    assert f(100) is f(100)
    assert np.array_equal(f(100), sample_dirichlet(100, 3.0, 2024))


def test_min_reads_crossing():
    design = DesignPoint.from_rates(K_SMALL, 45, 2, 0.8)
    probs = sample_dirichlet(design.N, 3.0, 1)
    res = min_reads(design, 0.01, probs, TARGET)
    assert res.path == "bisection"
    assert res.bound >= TARGET.level
    model = ReliabilityModel(design, 0.01, probs)
    below = res.R_all * (1 - 2e-3)
    assert model.bound(below).bound < TARGET.level
    assert res.depth == pytest.approx(res.R_all / K_SMALL)


def test_min_reads_bracket_errors():
    design = DesignPoint.from_rates(K_SMALL, 45, 2, 0.8)
    probs = sample_dirichlet(design.N, 3.0, 1)
    with pytest.raises(BracketError) as err:
        min_reads(design, 0.01, probs, TARGET, search=(10.0, 20.0), max_widen=0)
    assert err.value.bound_hi < TARGET.level
    with pytest.raises(ConfigurationError):
        min_reads(design, 0.01, probs, TARGET, search=(5.0, 1.0))


def test_min_reads_monotone_in_target():
    design = DesignPoint.from_rates(K_SMALL, 45, 1, 0.7)
    probs = sample_dirichlet(design.N, 3.0, 2)
    loose = min_reads(design, 0.01, probs, ReliabilityTarget(1e-3))
    tight = min_reads(design, 0.01, probs, ReliabilityTarget(1e-9))
    assert loose.R_all < tight.R_all


def test_opt_density_matches_exhaustive():
    probs = dirichlet_probs(3.0, 7)
    grid = np.round(np.arange(0.5, 0.96, 0.05), 10)
    kw = dict(K=K_SMALL, k_sym=45, m=8, epsilon=0.01, probs_for=probs, depth=8.0, target=TARGET,
              t_grid=range(0, 4), rho_out_grid=grid)
    fast = opt_density(**kw)
    full = opt_density(**kw, exhaustive=True)
    assert fast.feasible and full.feasible
    assert fast.design == full.design and fast.delta == full.delta
    assert fast.evaluations <= full.evaluations
    # the chosen point really is certified
    d = fast.design
    table = build_outcome_table(d.inner, 0.01, 9)
    b = best_retrieval_bound(SamplingSpec(probs(d.N), lam=8.0 * K_SMALL), d.outer, table)
    assert b.bound >= TARGET.level
    # and every denser point on the grid is not
    for t, N, value, ok in full.checked:
        dd = DesignPoint(K_SMALL, N, 45, t)
        if dd.delta > fast.delta + 1e-12:
            assert not ok


def test_opt_density_infeasible():
    res = opt_density(K_SMALL, 45, 8, 0.01, dirichlet_probs(3.0, 7), 0.5, TARGET,
                      t_grid=[0, 1], rho_out_grid=[0.5, 0.9])
    assert not res.feasible and res.delta == 0.0 and res.design is None


def test_opt_density_mc_certification():
    res = opt_density(K_SMALL, 45, 8, 0.01, dirichlet_probs(3.0, 7), 8.0, ReliabilityTarget(1e-2),
                      t_grid=[1, 2], rho_out_grid=[0.7, 0.9], certify="mc", mc_trials=50)
    assert res.certified_by == "mc"
    with pytest.raises(ConfigurationError):
        opt_density(K_SMALL, 45, 8, 0.01, dirichlet_probs(3.0, 7), 8.0, TARGET, certify="guess")
