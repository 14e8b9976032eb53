"""Speed of the ratchet via the two-point boundary-value problem.

The long-run speed equals -A'(0)/(2A(0)) where (A, B) solve

    A''(z) = -2 delta B(z) + 2 gamma z A(z)
    B'(z)  = -A'(z) - (gamma/delta) B(z)

with A(0) = 1/2, B(0) = 0 and A strictly decreasing to 0.  The missing
initial slope A'(0) is found by shooting: trajectories with too steep a
slope cross zero, too shallow ones turn around and grow, and bisection on
the slope separates the two regimes.

Conventions: the returned solution keeps the A(0) = 1/2 normalisation, which
fixes the speed ratio but not the stationary gap density.  The density of
the post-jump gap is proportional to 2*gamma*(A+B); its integral ``mass`` is
carried on the solution so that unit-mass quantities (density values, the
stationary means of the boundary displacement and the inter-jump time) can
be formed as f_Y = 2*gamma*(A+B)/mass, E[W] = -A'(0)/mass, E[eta] = 1/mass.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .airy import airy
from .params import Params


class BracketError(RuntimeError):
    """Shooting bisection could not separate the two trajectory classes."""


_STEEP = -1
_SHALLOW = +1

_FINE_GRID_POINTS = 20_000


@dataclass(frozen=True)
class OdeSolution:
    """Shot solution of the speed system on a uniform grid."""

    params: Params
    z_grid: np.ndarray
    A: np.ndarray
    B: np.ndarray
    a_prime_0: float
    speed: float
    mass: float  # integral of 2*gamma*(A+B) over the grid

    @property
    def z_max(self) -> float:
        return float(self.z_grid[-1])

    @property
    def mean_w_stationary(self) -> float:
        """Stationary mean boundary displacement E[W]."""
        return -self.a_prime_0 / self.mass

    @property
    def mean_eta_stationary(self) -> float:
        """Stationary mean inter-jump time E[eta]."""
        return 1.0 / self.mass


def speed_delta0(gamma: float) -> float:
    """Closed-form speed without dissociation:
    -Ai'(0)/(2 Ai(0)) * (2 gamma)^(1/3)."""
    if not gamma > 0:
        raise ValueError("gamma must be > 0")
    p = airy(0.0)
    return -p.ai_prime / (2.0 * p.ai) * (2.0 * gamma) ** (1.0 / 3.0)


def _rhs(z, A, P, B, gamma, delta, ratio):
    # ratio = gamma/delta
    return P, 2.0 * gamma * z * A - 2.0 * delta * B, -P - ratio * B


def _rk4_step(z, A, P, B, h, gamma, delta, ratio):
    k1 = _rhs(z, A, P, B, gamma, delta, ratio)
    k2 = _rhs(z + 0.5 * h, A + 0.5 * h * k1[0], P + 0.5 * h * k1[1],
              B + 0.5 * h * k1[2], gamma, delta, ratio)
    k3 = _rhs(z + 0.5 * h, A + 0.5 * h * k2[0], P + 0.5 * h * k2[1],
              B + 0.5 * h * k2[2], gamma, delta, ratio)
    k4 = _rhs(z + h, A + h * k3[0], P + h * k3[1], B + h * k3[2],
              gamma, delta, ratio)
    return (A + h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
            P + h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]),
            B + h / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]))


def _classify(slope, gamma, delta, z_hard):
    """Integrate with adaptive RK4 (step doubling) until the trajectory
    reveals itself as steep (A crosses 0) or shallow (A' turns >= 0 or A
    exceeds 1)."""
    if slope >= 0.0:
        return _SHALLOW
    ratio = gamma / delta
    h = min(1e-3, 0.5 / ratio if ratio > 0 else 1e-3)
    z, A, P, B = 0.0, 0.5, slope, 0.0
    atol = 1e-13
    while z < z_hard:
        h = min(h, z_hard - z)
        full = _rk4_step(z, A, P, B, h, gamma, delta, ratio)
        half = _rk4_step(z, A, P, B, 0.5 * h, gamma, delta, ratio)
        two = _rk4_step(z + 0.5 * h, *half, 0.5 * h, gamma, delta, ratio)
        err = max(abs(full[0] - two[0]), abs(full[1] - two[1]),
                  abs(full[2] - two[2]))
        tol = atol + 1e-10 * max(abs(A), abs(P), abs(B), 1.0)
        if err > tol and h > 1e-9:
            h = max(1e-9, 0.9 * h * (tol / err) ** 0.2)
            continue
        z += h
        A, P, B = two
        if err > 0:
            h = min(h * min(5.0, 0.9 * (tol / err) ** 0.2), 0.25)
        if A <= 0.0:
            return _STEEP
        if P >= 0.0 or A > 1.0:
            return _SHALLOW
    # Undecided at z_hard: only happens within rounding of the separatrix.
    return _STEEP if P < 0 and A < 1e-6 else _SHALLOW


def _default_z_hard(params: Params) -> float:
    # Decay argument where exp(-(2/3) y^(3/2)) ~ 1e-26, mapped back to z.
    scale = (2.0 * params.gamma) ** (1.0 / 3.0)
    shift = 2.0 ** (1.0 / 3.0) * params.delta / params.gamma ** (2.0 / 3.0)
    return (20.0 + shift) / scale


def _initial_bracket(params: Params, z_hard: float):
    lo = -2.0 * speed_delta0(params.gamma)
    for _ in range(60):
        if _classify(lo, params.gamma, params.delta, z_hard) == _STEEP:
            break
        lo *= 2.0
    else:
        raise BracketError("could not find a steep endpoint; "
                           "z_max too small or stiffness failure")
    return lo, 0.0


def _decreasing_head(A: np.ndarray) -> int:
    """Last index of the strictly decreasing positive prefix of A."""
    bad = np.nonzero((np.diff(A) >= 0) | (A[1:] <= 0))[0]
    return int(bad[0]) if bad.size else A.size - 1


def _grid_span(params: Params) -> float:
    """Span on which A has decayed below ~1e-9.

    The head decays on the Airy scale; for delta > 0 the tail is carried by
    the slow mode exp(-gamma z / delta) (the relaxation root of the linear
    system), which dominates the reach for moderate and large delta.
    """
    airy_span = 12.5 / (2.0 * params.gamma) ** (1.0 / 3.0)
    return airy_span + 22.0 * params.delta / params.gamma


def _solve_grids(params: Params, z_end: float):
    """Solve the linear system globally on a uniform grid (second-order
    collocation, banded solve) with A(0)=1/2, B(0)=0, A(z_end)=0.

    Forward integration cannot produce the far tail of A: the system has a
    strongly growing mode that amplifies rounding noise past any bisection
    accuracy long before A reaches 1e-8.  The global solve is stable on the
    whole span and agrees with the shot slope at z = 0 (cross-checked by the
    caller).
    """
    from scipy.linalg import solve_banded

    gamma, delta = params.gamma, params.delta
    ratio = gamma / delta
    n = min(max(_FINE_GRID_POINTS, int(z_end / 6e-4)), 300_000)
    h = z_end / n
    z = np.linspace(0.0, z_end, n + 1)
    # The boundary values A_0 = 1/2, B_0 = 0, A_n = 0 are eliminated (they
    # hold exactly in the output); unknowns interleave as
    # A_1, B_1, A_2, B_2, ..., A_{n-1}, B_{n-1}, B_n.
    m = 2 * n - 1
    # second differences for A at interior nodes; trapezoidal (midpoint)
    # rule for the first-order B equation on each cell
    bw = 3  # couplings reach +-3 positions in the interleaving
    ab = np.zeros((2 * bw + 1, m))
    rhs = np.zeros(m)
    inv_h = 1.0 / h
    inv_h2 = inv_h * inv_h

    def col_A(k):
        # A_k for k = 1..n-1
        return 2 * k - 2

    def col_B(k):
        # B_k for k = 1..n-1; B_n sits at the end of the vector
        return np.where(k < n, 2 * k - 1, m - 1)

    # A equation at node k = 1..n-1, row 2k-1:  ab[bw + row - col, col] += v
    k = np.arange(1, n)
    r = 2 * k - 1
    ab[bw + r - col_A(k), col_A(k)] += -2.0 * inv_h2 - 2.0 * gamma * z[k]
    ab[bw + r - col_B(k), col_B(k)] += 2.0 * delta
    ka = k[k >= 2]
    ra = 2 * ka - 1
    ab[bw + ra - col_A(ka - 1), col_A(ka - 1)] += inv_h2
    kb = k[k <= n - 2]
    rb = 2 * kb - 1
    ab[bw + rb - col_A(kb + 1), col_A(kb + 1)] += inv_h2
    rhs[2 * 1 - 1] -= inv_h2 * 0.5  # A_0 = 1/2 feeds the k = 1 equation
    # B equation on cell [k, k+1]:
    # (B_{k+1}-B_k)/h + (A_{k+1}-A_k)/h + ratio*(B_k+B_{k+1})/2 = 0
    # cell 0 -> row 0 (B_0 and A_0 eliminated), cells k = 1..n-1 -> row 2k
    ab[bw + 0 - col_B(np.int64(1)), col_B(np.int64(1))] += inv_h + 0.5 * ratio
    ab[bw + 0 - col_A(1), col_A(1)] += inv_h
    rhs[0] += inv_h * 0.5  # -(A_1 - A_0)/h contribution of A_0
    k = np.arange(1, n)
    r = 2 * k
    ab[bw + r - col_B(k), col_B(k)] += -inv_h + 0.5 * ratio
    ab[bw + r - col_B(k + 1), col_B(k + 1)] += inv_h + 0.5 * ratio
    ab[bw + r - col_A(k), col_A(k)] += -inv_h
    kc = k[k <= n - 2]
    rc = 2 * kc
    ab[bw + rc - col_A(kc + 1), col_A(kc + 1)] += inv_h  # A_n = 0 drops out
    sol = solve_banded((bw, bw), ab, rhs)
    A = np.empty(n + 1)
    B = np.empty(n + 1)
    A[0], B[0], A[n] = 0.5, 0.0, 0.0
    A[1:n] = sol[0: 2 * n - 3: 2]
    B[1:n] = sol[1: 2 * n - 2: 2]
    B[n] = sol[m - 1]
    return z, A, B


def solve_speed_ode(params: Params, z_max: float | None = None,
                    tol: float = 1e-12) -> OdeSolution:
    """Shoot on A'(0) and return the solution with its implied speed.

    The slope (and hence the speed) comes from bisection on the trajectory
    classifier; ``tol`` is the bracket width at which bisection stops and
    ``z_max`` overrides the classifier's integration span.  The returned
    grids come from a stable global solve of the same linear system and are
    validated against the shot slope.
    """
    if params.delta == 0.0:
        return _solution_delta0(params)
    gamma, delta = params.gamma, params.delta
    z_hard = z_max if z_max is not None else _default_z_hard(params)
    lo, hi = _initial_bracket(params, z_hard)
    if _classify(hi, gamma, delta, z_hard) != _SHALLOW:
        raise BracketError("bisection endpoints classify identically")
    target = max(tol, 1e-13)
    while hi - lo > target:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _classify(mid, gamma, delta, z_hard) == _STEEP:
            lo = mid
        else:
            hi = mid
    slope = 0.5 * (lo + hi)

    z, A, B = _solve_grids(params, _grid_span(params))
    h = z[1] - z[0]
    grid_slope = (-3.0 * A[0] + 4.0 * A[1] - A[2]) / (2.0 * h)
    if abs(grid_slope - slope) > 1e-4 * max(1.0, abs(slope)):
        raise BracketError(
            f"shot slope {slope:.8g} and grid slope {grid_slope:.8g} disagree")
    cut = _decreasing_head(A)
    z, A, B = z[: cut + 1], A[: cut + 1], B[: cut + 1]
    if A[-1] >= 1e-8:
        raise BracketError("grid solution does not decay below 1e-8; "
                           "z_max too small or stiffness failure")
    mass = float(np.trapezoid(2.0 * gamma * (A + B), z))
    return OdeSolution(params=params, z_grid=z, A=A, B=B, a_prime_0=slope,
                       speed=-slope / (2.0 * 0.5), mass=mass)


def _solution_delta0(params: Params) -> OdeSolution:
    """delta = 0 closed form: A(z) = Ai(s z) / (2 Ai(0)), B = 0."""
    gamma = params.gamma
    s = (2.0 * gamma) ** (1.0 / 3.0)
    a0 = airy(0.0)
    # argument where A drops below 1e-8: Ai(y) = 2 Ai(0) * 1e-8
    y_lo, y_hi = 8.0, 10.0
    target = 2.0 * a0.ai * 9.5e-9
    for _ in range(80):
        y_mid = 0.5 * (y_lo + y_hi)
        if airy(y_mid).ai > target:
            y_lo = y_mid
        else:
            y_hi = y_mid
    z_end = y_hi / s
    z = np.linspace(0.0, z_end, _FINE_GRID_POINTS // 4 + 1)
    A = np.array([airy(s * v).ai for v in z]) / (2.0 * a0.ai)
    B = np.zeros_like(A)
    slope = s * a0.ai_prime / (2.0 * a0.ai)
    mass = float(np.trapezoid(2.0 * gamma * A, z))
    return OdeSolution(params=params, z_grid=z, A=A, B=B, a_prime_0=slope,
                       speed=-slope, mass=mass)


def density_fY(ode: OdeSolution, params: Params, z) -> float | np.ndarray:
    """Stationary density of the post-jump gap, 2*gamma*(A+B) normalised to
    unit mass, interpolated on the solution grid."""
    zq = np.asarray(z, dtype=float)
    if np.any(zq < 0) or np.any(zq > ode.z_max):
        raise ValueError("argument outside the solution grid")
    f = 2.0 * params.gamma * (ode.A + ode.B) / ode.mass
    out = np.interp(zq, ode.z_grid, f)
    return float(out) if np.ndim(z) == 0 else out


def stationary_y_cdf(ode: OdeSolution):
    """(grid, cdf) of the stationary gap law, for equal-mass binning."""
    f = 2.0 * ode.params.gamma * (ode.A + ode.B)
    cdf = np.concatenate(([0.0], np.cumsum(np.diff(ode.z_grid)
                                           * 0.5 * (f[1:] + f[:-1]))))
    cdf /= cdf[-1]
    return ode.z_grid, cdf


def classifier_scan(params: Params, n: int = 200, z_max: float | None = None):
    """Classify trajectories on an n-point slope grid spanning the automatic
    bracket; the shot slope is valid iff there is exactly one sign change."""
    if params.delta == 0.0:
        raise ValueError("scan requires delta > 0 (delta = 0 is closed form)")
    z_hard = z_max if z_max is not None else _default_z_hard(params)
    lo, hi = _initial_bracket(params, z_hard)
    slopes = np.linspace(lo, hi, n)
    classes = np.array([_classify(s, params.gamma, params.delta, z_hard)
                        for s in slopes], dtype=int)
    changes = int(np.sum(classes[1:] != classes[:-1]))
    return slopes, classes, changes
