"""Shooting solver and the closed-form speed."""

import numpy as np
import pytest

from ratchet.ode import (BracketError, classifier_scan, density_fY,
                         solve_speed_ode, speed_delta0, stationary_y_cdf)
from ratchet.params import Params

# Gamma(2/3)/Gamma(1/3) * (3 gamma / 4)^(1/3) at gamma = 1/2, mpmath dps=30
GOLDEN = 0.36450556647361349


def test_golden_value():
    got = speed_delta0(0.5)
    assert got == pytest.approx(GOLDEN, abs=1e-12)
    assert abs(got - 0.36452) < 1e-4
    assert f"{got:.2f}" == "0.36"


def test_gamma_scaling_exact():
    for gamma in (0.25, 1.0, 3.0):
        assert speed_delta0(gamma) == pytest.approx(
            gamma ** (1 / 3) * speed_delta0(1.0), abs=1e-12)


def test_delta0_solution_object():
    sol = solve_speed_ode(Params(0.5, 0.0))
    assert sol.A[0] == pytest.approx(0.5)
    assert sol.B.max() == 0.0
    assert sol.speed == pytest.approx(GOLDEN, abs=1e-10)
    assert sol.A[-1] < 1e-8
    assert np.all(np.diff(sol.A) < 0)


def test_continuity_in_delta():
    # delta -> 0 limit approaches the closed form within 0.5%
    sol = solve_speed_ode(Params(0.5, 1e-3))
    assert abs(sol.speed / GOLDEN - 1.0) < 0.005


@pytest.mark.parametrize("delta", [0.25, 0.5, 1.0, 2.0])
def test_solution_shape(delta):
    sol = solve_speed_ode(Params(0.5, delta))
    assert sol.A[0] == pytest.approx(0.5)
    assert sol.B[0] == 0.0
    assert np.all(np.diff(sol.A) < 0)
    assert sol.A[-1] < 1e-8
    assert 0 < sol.speed < speed_delta0(0.5)


def test_speed_decreasing_in_delta():
    speeds = [solve_speed_ode(Params(0.5, d)).speed
              for d in (0.25, 0.5, 1.0, 2.0)]
    assert all(a > b for a, b in zip(speeds, speeds[1:]))
    assert speed_delta0(0.5) > speeds[0]


def test_scaling_identity_of_shot_speed():
    for gamma, delta in ((2.0, 1.0), (0.25, 0.5)):
        s1 = solve_speed_ode(Params(gamma, delta)).speed
        s2 = gamma ** (1 / 3) * solve_speed_ode(
            Params(1.0, delta * gamma ** (-2 / 3))).speed
        assert s1 == pytest.approx(s2, rel=1e-8)


def test_residuals_on_returned_grid():
    p = Params(0.5, 0.5)
    sol = solve_speed_ode(p)
    z, A, B = sol.z_grid, sol.A, sol.B
    h = z[1] - z[0]
    app = (A[2:] - 2 * A[1:-1] + A[:-2]) / h**2
    ap = (A[2:] - A[:-2]) / (2 * h)
    bp = (B[2:] - B[:-2]) / (2 * h)
    assert np.abs(app - (-2 * p.delta * B[1:-1]
                         + 2 * p.gamma * z[1:-1] * A[1:-1])).max() < 1e-6
    assert np.abs(bp + ap + (p.gamma / p.delta) * B[1:-1]).max() < 1e-6
    # A''(0) = 0 (4-point one-sided estimate, O(h^2))
    assert abs((2 * A[0] - 5 * A[1] + 4 * A[2] - A[3]) / h**2) < 1e-6


def test_density_fY():
    p = Params(0.5, 1.0)
    sol = solve_speed_ode(p)
    f = density_fY(sol, p, sol.z_grid)
    assert np.all(f >= 0)
    assert np.trapezoid(f, sol.z_grid) == pytest.approx(1.0, abs=1e-3)
    # f_Y(0) = 2 gamma A_true(0) = gamma / mass for the unit-mass density
    assert density_fY(sol, p, 0.0) == pytest.approx(p.gamma / sol.mass,
                                                    rel=1e-12)
    with pytest.raises(ValueError):
        density_fY(sol, p, sol.z_max + 1.0)
    zg, cdf = stationary_y_cdf(sol)
    assert cdf[0] == 0.0 and cdf[-1] == pytest.approx(1.0)
    assert np.all(np.diff(cdf) >= 0)


def test_stationary_moments_scale_consistently():
    # E[W]/E[eta] must reproduce the speed for any parameters
    for gamma, delta in ((0.5, 0.25), (2.0, 1.0)):
        sol = solve_speed_ode(Params(gamma, delta))
        assert sol.mean_w_stationary / sol.mean_eta_stationary == \
            pytest.approx(sol.speed, rel=1e-12)


def test_classifier_scan_single_sign_change():
    slopes, classes, changes = classifier_scan(Params(0.5, 1.0), n=200)
    assert changes == 1
    assert classes[0] == -1 and classes[-1] == 1


def test_classifier_scan_rejects_delta0():
    with pytest.raises(ValueError):
        classifier_scan(Params(0.5, 0.0))


def test_bracket_failure_signalled():
    # an integration span too short to classify anything steep
    with pytest.raises(BracketError):
        solve_speed_ode(Params(0.5, 1.0), z_max=0.05)


def test_tol_honoured():
    a = solve_speed_ode(Params(0.5, 1.0), tol=1e-12).speed
    b = solve_speed_ode(Params(0.5, 1.0), tol=1e-9).speed
    assert abs(a - b) < 1e-8
