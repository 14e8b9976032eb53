"""Stochastic primitives: killed reflected Brownian motion and Poisson
point sampling on bounded windows."""

from __future__ import annotations

import math

import numpy as np

from . import backend
from .params import KilledPathResult, Params, PoissonPoint, SimGrid
from .rng import rng_stream


def sample_killed_reflected_bm(params: Params, start: float, grid: SimGrid,
                               keep_path: bool = False,
                               gen: np.random.Generator | None = None
                               ) -> KilledPathResult:
    """Run reflected BM from ``start``, accumulating the hazard
    gamma*value + delta by the trapezoid rule per step, until it first
    exceeds an independent unit-exponential level.

    Returns the first grid time of exceedance and the position at the
    preceding grid time.  The run continues past ``grid.horizon`` (doubling
    the span) until killed; the horizon only sizes the initial path buffer.
    """
    if not math.isfinite(start) or start < 0:
        raise ValueError(f"start must be finite and >= 0, got {start!r}")
    if gen is None:
        gen = rng_stream(grid.seed, 0)
    out = backend.killed_rbm(gen, params.gamma, params.delta, float(start),
                             grid.dt, 1, keep_path)
    if keep_path:
        kt, kp, pt, px = out
        path = np.column_stack([pt, px])
    else:
        kt, kp = out
        path = None
    return KilledPathResult(kill_time=float(kt[0]), kill_position=float(kp[0]),
                            path=path)


def sample_kill_statistics(params: Params, start: float, grid: SimGrid,
                           n: int, stream_id: int = 0):
    """(kill_times, kill_positions) over ``n`` independent runs."""
    gen = rng_stream(grid.seed, stream_id)
    return backend.killed_rbm(gen, params.gamma, params.delta, float(start),
                              grid.dt, int(n), False)


def sample_poisson_points(stream: np.random.Generator, rate_density: float,
                          t_window: tuple[float, float],
                          x_window: tuple[float, float],
                          delta: float) -> list[PoissonPoint]:
    """Sample the binding points of one space-time window.

    Count is Poisson(rate_density * |t_window| * |x_window|); (tau, r) are
    uniform on the window; each bound duration z is Exp(delta), or None
    (never dissociates) when delta == 0.
    """
    t_lo, t_hi = map(float, t_window)
    x_lo, x_hi = map(float, x_window)
    for v in (t_lo, t_hi, x_lo, x_hi):
        if not math.isfinite(v):
            raise ValueError("windows must be bounded")
    if t_hi < t_lo or x_hi < x_lo:
        raise ValueError("windows must be ordered (lo, hi)")
    if not rate_density > 0:
        raise ValueError("rate_density must be > 0")
    if delta < 0:
        raise ValueError("delta must be >= 0")
    area = (t_hi - t_lo) * (x_hi - x_lo)
    if area == 0.0:
        return []
    n = int(stream.poisson(rate_density * area))
    taus = stream.uniform(t_lo, t_hi, size=n)
    rs = stream.uniform(x_lo, x_hi, size=n)
    if delta > 0:
        zs = stream.exponential(1.0 / delta, size=n)
    else:
        zs = [None] * n
    return [PoissonPoint(tau=float(taus[i]), r=float(rs[i]),
                         z=None if delta == 0 else float(zs[i]))
            for i in range(n)]
