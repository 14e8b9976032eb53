"""Molecule-set ratchet: construction invariants, thinning, domination."""

import numpy as np
import pytest

from ratchet.estimation import estimate_speed_renewal, estimate_speed_terminal
from ratchet.model1 import (renewal_increments, simulate_dominated_pair,
                            simulate_model1, simulate_model1_thinned)
from ratchet.params import (CAUSE_BINDING, CAUSE_DISSOCIATION, WINDOW, Params,
                            SimGrid, TruncationPolicy)
from ratchet.rng import rng_stream


def test_reflection_everywhere():
    for seed in range(10):
        run = simulate_model1(Params(0.5, 1.0), SimGrid(1e-3, 30.0, seed),
                              record=True)
        assert np.all(run.path.X >= run.path.R - 1e-12)


def test_delta0_boundary_nondecreasing_no_dissociation():
    run = simulate_model1(Params(0.5, 0.0), SimGrid(1e-3, 100.0, 7),
                          record=True)
    assert np.all(np.diff(run.path.R) >= 0)
    assert run.n_dissociations == 0
    assert np.all(run.events.cause == 1)


def test_event_causes_partition():
    run = simulate_model1(Params(0.5, 1.0), SimGrid(1e-3, 100.0, 8),
                          record=False)
    ev = run.events
    assert len(ev) > 0
    up = ev.cause == 1
    assert np.all(ev.new_boundary[up] > ev.old_boundary[up])
    assert np.all(ev.new_boundary[~up] <= ev.old_boundary[~up])
    labels = set(ev.cause_labels())
    assert labels <= {CAUSE_BINDING, CAUSE_DISSOCIATION}
    # boundary is piecewise constant between events: consecutive events'
    # old boundary equals the previous new boundary
    assert np.allclose(ev.old_boundary[1:], ev.new_boundary[:-1])


def test_thinned_equals_full_at_delta0():
    # no dissociation means the fallback restriction never binds; the two
    # simulators consume identical draws and produce identical paths
    grid = SimGrid(1e-3, 200.0, 9)
    a = simulate_model1(Params(0.5, 0.0), grid)
    b = simulate_model1_thinned(Params(0.5, 0.0), grid)
    assert a.terminal_X == b.terminal_X
    assert a.terminal_R == b.terminal_R


def test_window_mode_runs_and_synthetic_fallbacks_counted():
    run = simulate_model1(Params(0.5, 2.0), SimGrid(1e-3, 50.0, 10),
                          policy=TruncationPolicy(WINDOW, 30.0))
    assert run.n_synthetic_fallbacks >= 0
    assert run.n_dissociations > 0


def test_window_factor_validation():
    with pytest.raises(ValueError):
        TruncationPolicy(WINDOW, 5.0)
    with pytest.raises(ValueError):
        TruncationPolicy("nonsense")


def test_renewal_increments_positive_and_estimator_consistent():
    # one long thinned run: all renewal gaps positive; ratio-of-means agrees
    # with the direct terminal estimate within 3 joint SEs
    params = Params(0.5, 0.5)
    horizon = 5000.0
    run = simulate_model1_thinned(params, SimGrid(1e-3, horizon, 11))
    ds, dx = renewal_increments(run)
    assert np.all(ds > 0)
    est = estimate_speed_renewal((ds, dx), burn_in=0.02)
    # terminal estimate over independent replicates
    speeds = [simulate_model1_thinned(params, SimGrid(1e-3, 1000.0, 0),
                                      gen=rng_stream(111, k)).terminal_speed
              for k in range(16)]
    term = estimate_speed_terminal(speeds)
    joint = np.hypot(est.stderr, term.stderr)
    assert abs(est.mean - term.mean) <= 3 * joint


def test_renewal_increment_iidness_lag1():
    # renewal structure: lag-1 autocorrelation of the space increments is
    # statistically indistinguishable from zero (|rho| < 0.05 at n >= 2000)
    run = simulate_model1_thinned(Params(0.5, 0.5), SimGrid(1e-3, 7000.0, 12))
    _, dx = renewal_increments(run)
    assert dx.size >= 2000
    rho = np.corrcoef(dx[:-1], dx[1:])[0, 1]
    assert abs(rho) < 0.05


def test_renewal_increments_requires_two():
    run = simulate_model1_thinned(Params(0.5, 1.0), SimGrid(1e-3, 0.05, 13))
    if run.renewal_times is not None and len(run.renewal_times) < 2:
        with pytest.raises(ValueError):
            renewal_increments(run)


def test_domination_small():
    for seed in range(20):
        run = simulate_dominated_pair(Params(0.5, 1.0),
                                      SimGrid(1e-3, 50.0, seed))
        assert run.dominated
        assert run.terminal_X_thinned <= run.terminal_X_full + 1e-9


def test_domination_determinism():
    grid = SimGrid(1e-3, 20.0, 77)
    a = simulate_dominated_pair(Params(0.5, 1.0), grid)
    b = simulate_dominated_pair(Params(0.5, 1.0), grid)
    assert a.terminal_X_full == b.terminal_X_full
    assert a.terminal_X_thinned == b.terminal_X_thinned


def test_floor_vs_window_speed_order_high_delta():
    # pinning the fallback floor at 0 overstates the speed once dissociation
    # matters; check the ordering with a generous noise allowance
    params = Params(0.5, 4.0)
    grid = SimGrid(1e-3, 400.0, 14)
    floor = [simulate_model1(params, grid, gen=rng_stream(300, k)).terminal_speed
             for k in range(24)]
    window = [simulate_model1(params, grid, TruncationPolicy(WINDOW, 30.0),
                              gen=rng_stream(301, k)).terminal_speed
              for k in range(24)]
    ef, ew = estimate_speed_terminal(floor), estimate_speed_terminal(window)
    assert ef.mean >= ew.mean - 3 * np.hypot(ef.stderr, ew.stderr)
