"""Windowed Poisson point sampling."""

import numpy as np
import pytest

from ratchet.core import sample_poisson_points
from ratchet.rng import rng_stream


def test_count_mean():
    # rate 1 on the unit square: mean count within 1% of 1 over 1e5 windows
    gen = rng_stream(31, 0)
    counts = [len(sample_poisson_points(gen, 1.0, (0, 1), (0, 1), 0.0))
              for _ in range(100_000)]
    assert abs(np.mean(counts) - 1.0) < 0.01


def test_empty_window():
    gen = rng_stream(31, 1)
    assert sample_poisson_points(gen, 5.0, (2.0, 2.0), (0, 1), 1.0) == []
    assert sample_poisson_points(gen, 5.0, (0, 1), (3.0, 3.0), 1.0) == []


def test_exponential_durations():
    gen = rng_stream(31, 2)
    zs = []
    while len(zs) < 100_000:
        zs.extend(p.z for p in sample_poisson_points(
            gen, 50.0, (0, 10), (0, 10), 2.0))
    zs = np.asarray(zs[:100_000])
    assert abs(zs.mean() - 0.5) < 0.01
    assert np.all(zs > 0)


def test_never_dissociates_marker():
    gen = rng_stream(31, 3)
    pts = sample_poisson_points(gen, 20.0, (0, 2), (0, 2), 0.0)
    assert len(pts) > 0
    assert all(p.z is None for p in pts)


def test_uniform_positions():
    gen = rng_stream(31, 4)
    pts = sample_poisson_points(gen, 50.0, (1.0, 3.0), (-2.0, 2.0), 1.0)
    taus = np.array([p.tau for p in pts])
    rs = np.array([p.r for p in pts])
    assert taus.min() >= 1.0 and taus.max() <= 3.0
    assert rs.min() >= -2.0 and rs.max() <= 2.0
    assert abs(taus.mean() - 2.0) < 0.15
    assert abs(rs.mean() - 0.0) < 0.3


def test_rejects_bad_windows():
    gen = rng_stream(31, 5)
    with pytest.raises(ValueError):
        sample_poisson_points(gen, 1.0, (0, float("inf")), (0, 1), 1.0)
    with pytest.raises(ValueError):
        sample_poisson_points(gen, 1.0, (1, 0), (0, 1), 1.0)
    with pytest.raises(ValueError):
        sample_poisson_points(gen, 0.0, (0, 1), (0, 1), 1.0)
