"""Equilibrium ratchet: jump laws, the two constructions, coupling."""

import numpy as np
import pytest
from scipy.stats import chi2, ks_2samp, kstest

from ratchet.estimation import estimate_speed_renewal, estimate_speed_terminal
from ratchet.model2 import (simulate_coupled_pair, simulate_model2,
                            simulate_model2_activepoint,
                            stationary_jump_statistics)
from ratchet.params import Params, SimGrid
from ratchet.rng import rng_stream

THIN = 5  # lag-1 autocorrelation of the jump chain dies within ~5 jumps


@pytest.fixture(scope="module")
def long_chain():
    params = Params(0.5, 1.0)
    grid = SimGrid(dt=5e-4, horizon=1.0, seed=42)
    run = simulate_model2(params, grid, until_jumps=60_000)
    n0 = len(run.jumps) // 5
    return run.jumps[n0:]


def test_reflection_and_boundary_piecewise_constant():
    run = simulate_model2(Params(0.5, 1.0), SimGrid(1e-3, 50.0, 1),
                          record=True)
    assert np.all(run.path.X >= run.path.R - 1e-12)
    # R changes only at jump times: number of distinct R plateaus is the
    # number of jumps + 1
    changes = np.nonzero(np.diff(run.path.R))[0]
    assert abs(changes.size - len(run.jumps)) <= 1


def test_delta0_reduces_to_pure_up_jumps():
    run = simulate_model2(Params(0.5, 0.0), SimGrid(1e-3, 200.0, 2))
    assert np.all(run.jumps.W > 0)


def test_jump_records_consistent():
    run = simulate_model2(Params(0.5, 1.0), SimGrid(1e-3, 200.0, 3))
    j = run.jumps
    assert np.all(j.Y >= 0)
    assert np.all(j.eta > 0)
    assert j.t[0] == pytest.approx(j.eta[0])
    assert np.allclose(np.diff(j.t), j.eta[1:])
    # boundary total displacement matches the event log
    assert run.events.new_boundary[-1] == pytest.approx(run.terminal_R)


def test_up_jump_landing_uniform(long_chain):
    # conditioned on an up jump from gap y, the landing is Uniform(0, y):
    # W / (Y + W) is standard uniform
    j = long_chain
    up = j.W > 0
    u = (j.W[up] / (j.Y[up] + j.W[up]))[::THIN][:10_000]
    res = kstest(u, "uniform")
    assert res.pvalue > 0.01


def test_up_jump_W_equals_Y_in_law(long_chain):
    # disjoint thinned subsamples dodge the W-Y pairing within one jump
    j = long_chain
    up_idx = np.nonzero(j.W > 0)[0]
    w = j.W[up_idx[0::2]][::THIN][:10_000]
    y = j.Y[up_idx[1::2]][::THIN][:10_000]
    res = ks_2samp(w, y)
    assert res.pvalue > 0.01


def test_down_jump_magnitude(long_chain):
    j = long_chain
    down = ~(j.W > 0)
    mags = -j.W[down]
    assert abs(mags.mean() / 2.0 - 1.0) < 0.02  # Exp(gamma/delta), mean 2


def test_direction_frequencies(long_chain):
    # up fraction from pre-jump gap y is gamma*y/(gamma*y + delta)
    gamma, delta = 0.5, 1.0
    j = long_chain
    pre = j.Y + j.W  # gap just before the jump, for both directions
    up = (j.W > 0).astype(float)
    qs = np.quantile(pre, np.linspace(0, 1, 7))
    for lo, hi in zip(qs[:-1], qs[1:]):
        sel = (pre >= lo) & (pre < hi)
        if sel.sum() < 500:
            continue
        y = pre[sel].mean()
        p = gamma * y / (gamma * y + delta)
        se = np.sqrt(p * (1 - p) / sel.sum()) * 2.0  # correlation allowance
        assert abs(up[sel].mean() - p) < 4 * se


def test_markov_property_surrogate(long_chain):
    # conditioned on Y_n in a narrow band, the law of Y_{n+1} does not
    # depend on Y_{n-1} (chi-square homogeneity across Y_{n-1} terciles)
    j = long_chain
    y = j.Y
    lo, hi = np.quantile(y, [0.45, 0.55])
    idx = np.nonzero((y[1:-1] >= lo) & (y[1:-1] < hi))[0] + 1
    prev = y[idx - 1]
    nxt = y[idx + 1]
    groups = np.digitize(prev, np.quantile(prev, [1 / 3, 2 / 3]))
    edges = np.quantile(nxt, np.linspace(0, 1, 5)[1:-1])
    cells = np.digitize(nxt, edges)
    table = np.zeros((3, 4))
    for g, c in zip(groups, cells):
        table[g, c] += 1
    row = table.sum(axis=1, keepdims=True)
    col = table.sum(axis=0, keepdims=True)
    expected = row * col / table.sum()
    stat = ((table - expected) ** 2 / expected).sum()
    p = chi2.sf(stat, (3 - 1) * (4 - 1))
    assert p > 0.01


def test_stationary_statistics_interface(long_chain):
    stats = stationary_jump_statistics(long_chain, burn_in_fraction=0.0)
    est = estimate_speed_renewal(long_chain, burn_in=0.0)
    assert est.mean == pytest.approx(stats.mean_W / stats.mean_eta, rel=1e-12)
    assert stats.n_used == len(long_chain)
    with pytest.raises(ValueError):
        stationary_jump_statistics(long_chain[:100])


def test_constructions_agree():
    params = Params(0.5, 1.0)
    grid = SimGrid(1e-3, 300.0, 4)
    a = [simulate_model2(params, grid, gen=rng_stream(400, k)).terminal_speed
         for k in range(24)]
    b = []
    for k in range(24):
        run, disc = simulate_model2_activepoint(params, grid,
                                                gen=rng_stream(401, k))
        b.append(run.terminal_speed)
        assert disc < 1e-9  # X continuous across jumps by construction
    ea, eb = estimate_speed_terminal(a), estimate_speed_terminal(b)
    assert abs(ea.mean - eb.mean) <= 3 * np.hypot(ea.stderr, eb.stderr)


def test_activepoint_reflection():
    run, _ = simulate_model2_activepoint(Params(0.5, 1.0),
                                         SimGrid(1e-3, 50.0, 5), record=True)
    assert np.all(run.path.X >= run.path.R - 1e-12)


def test_activepoint_rejects_delta0():
    with pytest.raises(ValueError):
        simulate_model2_activepoint(Params(0.5, 0.0), SimGrid(1e-3, 10.0, 6))


def test_coupling_identical_starts():
    res = simulate_coupled_pair(Params(0.5, 1.0), 1.5, 1.5,
                                SimGrid(1e-3, 5.0, 7))
    assert res.coupling_time == 0.0


def test_coupling_happens_and_is_exact():
    coupled = 0
    for seed in range(20):
        res = simulate_coupled_pair(Params(0.5, 1.0), 0.0, 5.0,
                                    SimGrid(1e-3, 1000.0, seed),
                                    gen=rng_stream(500, seed))
        if res.coupled:
            coupled += 1
            assert res.max_active_point_gap_after == 0.0
    assert coupled >= 19


def test_coupling_horizon_exhaustion_reported():
    res = simulate_coupled_pair(Params(0.5, 1.0), 0.0, 50.0,
                                SimGrid(1e-3, 0.5, 8))
    if not res.coupled:
        assert res.coupling_time is None


def test_coupling_input_validation():
    with pytest.raises(ValueError):
        simulate_coupled_pair(Params(0.5, 0.0), 0.0, 1.0, SimGrid(1e-3, 1.0, 9))
    with pytest.raises(ValueError):
        simulate_coupled_pair(Params(0.5, 1.0), -1.0, 1.0,
                              SimGrid(1e-3, 1.0, 9))
