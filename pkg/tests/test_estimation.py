"""Estimators, the cumulative decomposition, and the comparison drivers."""

import numpy as np
import pytest

from ratchet.estimation import (CumulativeDecomposition, compare_models,
                                decompose_cumulative, estimate_speed_renewal,
                                estimate_speed_terminal, run_terminal_speeds,
                                scaling_collapse_check)
from ratchet.model1 import simulate_model1_thinned
from ratchet.model2 import simulate_model2
from ratchet.params import Params, SimGrid
from ratchet.rng import rng_stream


def test_terminal_degenerate():
    est = estimate_speed_terminal([0.25] * 10)
    assert est.mean == 0.25
    assert est.stderr == 0.0
    assert est.ci == (0.25, 0.25)


def test_terminal_requires_two():
    with pytest.raises(ValueError):
        estimate_speed_terminal([0.3])


def test_stderr_shrinks_like_root_n():
    # doubling the replicate count shrinks the standard error by a factor
    # close to 1/sqrt(2)
    x = rng_stream(61, 0).standard_normal(80_000) * 0.01 + 0.3
    ratios = []
    for k in range(40):
        a = estimate_speed_terminal(x[2000 * k: 2000 * k + 1000])
        b = estimate_speed_terminal(x[2000 * k: 2000 * (k + 1)])
        ratios.append(b.stderr / a.stderr)
    assert 0.6 < np.mean(ratios) < 0.82


def test_renewal_constant_increments():
    ds = np.full(6000, 0.5)
    dx = np.full(6000, 0.2)
    est = estimate_speed_renewal((ds, dx), burn_in=0.0)
    assert est.mean == pytest.approx(0.4, rel=1e-14)
    assert est.stderr == 0.0
    # jackknife cross-check is emitted at this sample size
    assert est.jackknife_se == pytest.approx(0.0, abs=1e-15)


def test_renewal_needs_data():
    with pytest.raises(ValueError):
        estimate_speed_renewal((np.ones(50), np.ones(50)), burn_in=0.0)


def test_renewal_vs_terminal_model2():
    params = Params(0.5, 1.0)
    run = simulate_model2(params, SimGrid(1e-3, 3000.0, 62))
    ren = estimate_speed_renewal(run.jumps)
    speeds = run_terminal_speeds("model2", params, SimGrid(1e-3, 500.0, 63),
                                 24)
    term = estimate_speed_terminal(speeds)
    assert abs(ren.mean - term.mean) <= 3 * np.hypot(ren.stderr, term.stderr)


def test_decompose_identity_exact():
    run = simulate_model1_thinned(Params(0.5, 1.0), SimGrid(1e-3, 300.0, 64))
    dec = decompose_cumulative(run)
    assert isinstance(dec, CumulativeDecomposition)
    assert dec.identity_residual < 1e-9
    assert dec.n_renewals == len(run.renewal_times) - 1


def test_decompose_head_only():
    # before the first renewal: S = 0 and the remainder is all of X_T;
    # start high so no renewal can occur in the short horizon
    run = simulate_model1_thinned(Params(0.5, 1.0, x0=25.0),
                                  SimGrid(1e-3, 0.1, 65))
    if len(run.renewal_times) == 1:
        dec = decompose_cumulative(run)
        assert dec.S == 0.0
        assert dec.remainder == pytest.approx(run.terminal_X)


def test_remainder_rate_shrinks_with_horizon():
    # median |A_T|/T decreases from T=500 to T=5000 (cumulative-process
    # remainder is o(T))
    params = Params(0.5, 1.0)
    rates = {}
    for horizon, block in ((500.0, 70), (5000.0, 71)):
        vals = []
        for k in range(9):
            run = simulate_model1_thinned(params, SimGrid(1e-3, horizon, 0),
                                          gen=rng_stream(block, k))
            vals.append(abs(decompose_cumulative(run).remainder_rate))
        rates[horizon] = float(np.median(vals))
    assert rates[5000.0] < rates[500.0]


def test_ci_calibration_delta0():
    # 95% t-intervals on the known delta=0 speed: coverage over 100
    # independent meta-replicates stays at the nominal level (>= 88)
    from ratchet.ode import speed_delta0
    truth = speed_delta0(0.5)
    grid = SimGrid(1e-3, 400.0, 0)
    covered = 0
    for meta in range(100):
        speeds = [simulate_model2(Params(0.5, 0.0), grid,
                                  gen=rng_stream(900 + meta, k)).terminal_speed
                  for k in range(12)]
        est = estimate_speed_terminal(speeds, ci_level=0.95)
        covered += est.covers(truth)
    assert covered >= 88


def test_scaling_gamma1_trivial():
    rep = scaling_collapse_check("model2", 1.0, 0.5,
                                 SimGrid(1e-3, 200.0, 66), 12)
    assert rep.scale == 1.0
    assert rep.collapsed  # identical parameter sets, same estimator law


def test_compare_models_structure():
    table = compare_models(0.5, [0.0, 1.0], SimGrid(1e-3, 100.0, 67), 8)
    assert [row.delta for row in table.rows] == [0.0, 1.0]
    row = table.rows[1]
    assert row.speed_model2_ode == pytest.approx(0.18812, abs=1e-4)
    assert row.speed_model1_floor.n_replicates == 8
    assert table.max_relative_gap() >= 0.0


def test_run_terminal_speeds_deterministic():
    params = Params(0.5, 0.5)
    grid = SimGrid(1e-3, 50.0, 68)
    a = run_terminal_speeds("model2", params, grid, 6)
    b = run_terminal_speeds("model2", params, grid, 6)
    assert np.array_equal(a, b)
    with pytest.raises(ValueError):
        run_terminal_speeds("nope", params, grid, 2)
