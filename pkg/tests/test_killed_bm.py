"""Killed reflected Brownian motion against the Green-function predictions."""

import numpy as np
import pytest
from scipy.stats import kstwobign

from ratchet.backend import killed_rbm
from ratchet.core import sample_kill_statistics, sample_killed_reflected_bm
from ratchet.green import green_context, mean_kill_position, mean_kill_time
from ratchet.params import KilledPathResult, Params, SimGrid
from ratchet.rng import rng_stream


def test_determinism_bit_identical():
    grid = SimGrid(dt=1e-3, horizon=10.0, seed=99)
    a = sample_killed_reflected_bm(Params(0.5, 1.0), 1.0, grid, keep_path=True)
    b = sample_killed_reflected_bm(Params(0.5, 1.0), 1.0, grid, keep_path=True)
    assert a.kill_time == b.kill_time
    assert a.kill_position == b.kill_position
    assert np.array_equal(a.path, b.path)


def test_result_shape_and_reflection_positivity():
    grid = SimGrid(dt=1e-3, horizon=10.0, seed=5)
    res = sample_killed_reflected_bm(Params(0.5, 0.5), 0.0, grid,
                                     keep_path=True)
    assert isinstance(res, KilledPathResult)
    assert res.kill_time > 0
    assert res.kill_position >= 0
    # every recorded value nonnegative, for many seeds
    for seed in range(50):
        r = sample_killed_reflected_bm(Params(0.5, 0.5), 0.2,
                                       SimGrid(1e-3, 10.0, seed),
                                       keep_path=True)
        assert np.all(r.path[:, 1] >= 0)


def test_rejects_bad_start():
    grid = SimGrid(dt=1e-3, horizon=10.0, seed=1)
    with pytest.raises(ValueError):
        sample_killed_reflected_bm(Params(0.5, 0.0), float("nan"), grid)
    with pytest.raises(ValueError):
        sample_killed_reflected_bm(Params(0.5, 0.0), -0.5, grid)


def test_constant_hazard_kill_times_exponential():
    # gamma = 0 removes the path dependence; kill times are Exp(delta) up to
    # grid rounding.  KS statistic below the 1% critical value at n = 1e5.
    delta = 1.0
    dt = 1e-3
    gen = rng_stream(11, 0)
    kt, _ = killed_rbm(gen, 0.0, delta, 0.0, dt, 100_000, False)
    u = np.sort(1.0 - np.exp(-delta * kt))
    n = u.size
    d = np.max(np.maximum(u - np.arange(n) / n, (np.arange(n) + 1) / n - u))
    crit = kstwobign.ppf(0.99) / np.sqrt(n)
    assert d < crit + delta * dt  # rounding to the grid shifts by <= dt


def test_constant_hazard_mean_surrogate():
    # delta -> large: mean kill time ~ 1/delta (within 5%)
    gen = rng_stream(12, 0)
    kt, _ = killed_rbm(gen, 0.5, 100.0, 0.0, 1e-5, 50_000, False)
    assert abs(kt.mean() * 100.0 - 1.0) < 0.05


@pytest.mark.parametrize("gamma,delta,x", [(0.5, 0.0, 0.0), (0.5, 1.0, 1.0),
                                           (1.0, 1.0, 2.0)])
def test_mean_kill_position(gamma, delta, x):
    # 2e4 replicates at dt = 1e-4: well inside the 2% band around
    # x + phi(x) psi(0) / w (the full-scale run lives in the acceptance
    # suite)
    params = Params(gamma, delta)
    grid = SimGrid(dt=1e-4, horizon=8.0, seed=13)
    kt, kp = sample_kill_statistics(params, x, grid, 20_000)
    ctx = green_context(params)
    assert abs(kp.mean() / mean_kill_position(ctx, x) - 1.0) < 0.02


def test_mean_kill_time_vs_green_integral():
    # speed-measure integral of the Green function gives E[kill time]
    params = Params(0.5, 1.0)
    grid = SimGrid(dt=1e-4, horizon=8.0, seed=14)
    kt, _ = sample_kill_statistics(params, 1.0, grid, 20_000)
    target = mean_kill_time(green_context(params), 1.0)
    assert abs(kt.mean() / target - 1.0) < 0.02


def test_horizon_extension():
    # horizon far below the typical kill time still returns a kill
    grid = SimGrid(dt=1e-3, horizon=0.01, seed=15)
    res = sample_killed_reflected_bm(Params(0.1, 0.0), 0.0, grid)
    assert res.kill_time > 0.01
