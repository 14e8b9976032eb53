"""Green-function identities; quadrature (QUADPACK) is the oracle."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from ratchet.green import (green, green_context, kill_position_density,
                           mean_kill_position, mean_kill_time)
from ratchet.params import Params

CASES = [Params(0.5, 0.0), Params(0.5, 1.0), Params(1.0, 1.0),
         Params(0.5, 2.0), Params(2.0, 1.0)]


@pytest.mark.parametrize("params", CASES, ids=str)
def test_wronskian_and_reflecting_condition(params):
    ctx = green_context(params)
    target = (2 * params.gamma) ** (1 / 3) / np.pi
    assert ctx.w == pytest.approx(target, rel=1e-14)
    for x in np.linspace(0.0, 8.0, 160):
        w = ctx.psi_prime(x) * ctx.phi(x) - ctx.psi(x) * ctx.phi_prime(x)
        assert abs(w - ctx.w) < 1e-8
    assert abs(ctx.psi_prime(0.0)) < 1e-8


def test_green_symmetric_exact():
    ctx = green_context(Params(0.5, 1.0))
    for x, y in ((0.0, 1.0), (1.0, 2.5), (3.0, 0.5)):
        assert green(ctx, x, y) == green(ctx, y, x)


@given(st.floats(min_value=0.0, max_value=6.0),
       st.floats(min_value=0.0, max_value=6.0))
@settings(max_examples=100, deadline=None)
def test_green_positive(x, y):
    ctx = green_context(Params(0.5, 0.5))
    assert green(ctx, x, y) > 0.0


@pytest.mark.parametrize("params", [Params(0.5, 0.0), Params(0.5, 1.0)],
                         ids=str)
def test_kill_density_normalizes(params):
    # the killing-position density G(x, .)k(.) integrates to 1
    ctx = green_context(params)
    for x in (0.0, 1.5):
        val, err = quad(lambda y: kill_position_density(ctx, x, y), 0.0, 30.0,
                        limit=300, epsrel=1e-9)
        assert abs(val - 1.0) < 1e-6


def test_mean_increment_formula_vs_quadrature():
    # E_2[pre-kill position] for gamma = delta = 1: direct integral of
    # y G(2,y) k(y) against the closed form x + phi(x) psi(0) / w
    ctx = green_context(Params(1.0, 1.0))
    direct, _ = quad(lambda y: y * kill_position_density(ctx, 2.0, y), 0.0,
                     30.0, limit=300, epsrel=1e-10)
    assert direct == pytest.approx(mean_kill_position(ctx, 2.0), abs=1e-6)
    # frozen value from the same quadrature oracle
    assert direct == pytest.approx(2.0094333379, abs=1e-6)


def test_mean_increment_bounds_and_monotonicity():
    ctx = green_context(Params(0.5, 1.0))
    lower = mean_kill_position(ctx, 0.0)
    c = ctx.phi(0.0) * ctx.psi(0.0) / ctx.w
    assert lower == pytest.approx(c, rel=1e-14)
    xs = np.linspace(0.0, 6.0, 100)
    vals = [mean_kill_position(ctx, x) for x in xs]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    for x, v in zip(xs, vals):
        assert c - 1e-12 <= v <= x + c + 1e-12


def test_mean_kill_time_against_plain_quadrature():
    ctx = green_context(Params(0.5, 1.0))
    for x in (0.0, 2.0):
        direct, _ = quad(lambda y: 2.0 * green(ctx, x, y), 0.0, 25.0,
                         limit=300, epsrel=1e-9)
        assert mean_kill_time(ctx, x) == pytest.approx(direct, rel=1e-6)


def test_range_errors():
    ctx = green_context(Params(0.5, 0.0))
    with pytest.raises(ValueError):
        green(ctx, -0.1, 1.0)
    with pytest.raises(ValueError):
        green(ctx, 0.0, 1e9)
    with pytest.raises(ValueError):
        mean_kill_position(ctx, -1.0)
    with pytest.raises(ValueError):
        green_context(Params(0.5, 40.0))
