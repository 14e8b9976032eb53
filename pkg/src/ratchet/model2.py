"""Equilibrium-approximation ratchet: boundary jumps fire at integrated
hazard gamma*(X-R) + delta, landing uniformly in (R, X) on an up jump and
falling by Exp(gamma/delta) on a down jump."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend
from .mathx import batch_means_se
from .params import (BoundaryEventLog, CoupledRunResult, JumpChain, Params,
                     PathSample, RatchetRun, SimGrid)
from .rng import rng_stream


def _chain_events(jumps: JumpChain) -> BoundaryEventLog:
    new_b = np.cumsum(jumps.W)
    old_b = new_b - jumps.W
    return BoundaryEventLog(jumps.t, old_b, new_b,
                            np.where(jumps.W > 0, 1, -1))


def simulate_model2(params: Params, grid: SimGrid, record: bool = False,
                    until_jumps: int | None = None,
                    gen: np.random.Generator | None = None) -> RatchetRun:
    """One trajectory of the jump-recursion construction.

    ``until_jumps`` switches the stopping rule from the grid horizon to a
    jump count (for stationary-chain studies).
    """
    if gen is None:
        gen = rng_stream(grid.seed, 0)
    out = backend.model2_run(gen, params.gamma, params.delta, params.x0,
                             grid.dt, grid.horizon,
                             0 if until_jumps is None else int(until_jumps),
                             1 if record else 0)
    X, R, t, jt, jY, jW, jeta, pt, pX, pR = out
    jumps = JumpChain(jt, jY, jW, jeta)
    events = _chain_events(jumps)
    path = PathSample(pt, pX, pR, events) if record else None
    return RatchetRun(params=params, grid=grid, terminal_X=float(X),
                      terminal_R=float(R), path=path, events=events,
                      jumps=jumps, horizon_used=float(t))


def simulate_model2_activepoint(params: Params, grid: SimGrid,
                                record: bool = False,
                                until_jumps: int | None = None,
                                gen: np.random.Generator | None = None
                                ) -> tuple[RatchetRun, float]:
    """Alternative construction driven by one unreflected Brownian motion
    and a jumping active point; distributionally equivalent to
    :func:`simulate_model2`.  Also returns the largest X discontinuity
    observed across jumps (a construction identity; should be ~1 ulp)."""
    if params.delta <= 0:
        raise ValueError("active-point construction requires delta > 0")
    if gen is None:
        gen = rng_stream(grid.seed, 0)
    out = backend.model2_active_run(gen, params.gamma, params.delta,
                                    params.x0, grid.dt, grid.horizon,
                                    0 if until_jumps is None else int(until_jumps),
                                    1 if record else 0)
    X, R, t, jt, jY, jW, jeta, max_disc, pt, pX, pR = out
    jumps = JumpChain(jt, jY, jW, jeta)
    events = _chain_events(jumps)
    path = PathSample(pt, pX, pR, events) if record else None
    run = RatchetRun(params=params, grid=grid, terminal_X=float(X),
                     terminal_R=float(R), path=path, events=events,
                     jumps=jumps, horizon_used=float(t))
    return run, float(max_disc)


def simulate_coupled_pair(params: Params, x1: float, x2: float, grid: SimGrid,
                          record: bool = False,
                          gen: np.random.Generator | None = None
                          ) -> CoupledRunResult:
    """Two active-point ratchets on one Brownian motion with maximally
    coupled jumps; reports the first time the active points merge (None if
    the horizon is exhausted first)."""
    if params.delta <= 0:
        raise ValueError("coupling requires delta > 0")
    if x1 < 0 or x2 < 0:
        raise ValueError("x1, x2 must be >= 0")
    if gen is None:
        gen = rng_stream(grid.seed, 0)
    out = backend.coupled_pair_run(gen, params.gamma, params.delta,
                                   float(x1), float(x2), grid.dt,
                                   grid.horizon, 1 if record else 0)
    ct, X1, X2, jumps_after, max_spread, pt, pX1, pR1, pX2, pR2 = out
    path1 = path2 = None
    if record:
        path1 = PathSample(pt, pX1, pR1, None)
        path2 = PathSample(pt, pX2, pR2, None)
    return CoupledRunResult(coupling_time=None if ct < 0 else float(ct),
                            terminal_X1=float(X1), terminal_X2=float(X2),
                            jumps_after_coupling=int(jumps_after),
                            max_active_point_gap_after=float(max_spread),
                            path1=path1, path2=path2)


@dataclass(frozen=True)
class JumpStatistics:
    """Post-burn-in summaries of the jump chain."""

    mean_W: float
    se_W: float
    mean_eta: float
    se_eta: float
    y_counts: np.ndarray
    y_edges: np.ndarray
    n_used: int

    @property
    def speed(self) -> float:
        return self.mean_W / self.mean_eta


def stationary_jump_statistics(jumps: JumpChain, burn_in_fraction: float = 0.2,
                               y_bins: int = 30) -> JumpStatistics:
    """Discard the first ``burn_in_fraction`` of records, then return the
    means of W and eta (batch-means standard errors; the chain is
    autocorrelated) and a normalized histogram of Y."""
    if not 0 <= burn_in_fraction < 1:
        raise ValueError("burn_in_fraction must be in [0, 1)")
    n0 = int(len(jumps) * burn_in_fraction)
    kept = jumps[n0:]
    if len(kept) < 1000:
        raise ValueError(f"need >= 1000 post-burn-in records, have {len(kept)}")
    counts, edges = np.histogram(kept.Y, bins=y_bins, density=True)
    return JumpStatistics(mean_W=float(kept.W.mean()),
                          se_W=batch_means_se(kept.W),
                          mean_eta=float(kept.eta.mean()),
                          se_eta=batch_means_se(kept.eta),
                          y_counts=counts, y_edges=edges, n_used=len(kept))
