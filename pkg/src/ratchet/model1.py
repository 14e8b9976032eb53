"""Molecule-set ratchet (full and thinned) built on the graphical
construction: Poisson bindings on an interval below the diffusing
coordinate, per-molecule exponential unbinding, boundary = maximal bound
molecule."""

from __future__ import annotations

import numpy as np

from . import backend
from .params import (WINDOW, BoundaryEventLog, Params, PathSample,
                     RatchetRun, SimGrid, TruncationPolicy)
from .rng import rng_stream

HIT_TOL = 1e-9


def _wrap_run(params, grid, out, thinned, record):
    (X, R, t, ev_t, ev_old, ev_new, ev_cause, ren_t, ren_X,
     n_bind, n_dissoc, n_synth, pt, pX, pR) = out
    events = BoundaryEventLog(ev_t, ev_old, ev_new, ev_cause)
    path = PathSample(pt, pX, pR, events) if record else None
    return RatchetRun(params=params, grid=grid, terminal_X=float(X),
                      terminal_R=float(R), path=path, events=events,
                      renewal_times=ren_t if thinned else None,
                      renewal_X=ren_X if thinned else None,
                      horizon_used=float(t), n_bindings=int(n_bind),
                      n_dissociations=int(n_dissoc),
                      n_synthetic_fallbacks=int(n_synth))


def simulate_model1(params: Params, grid: SimGrid,
                    policy: TruncationPolicy = TruncationPolicy(),
                    record: bool = False,
                    gen: np.random.Generator | None = None) -> RatchetRun:
    """One full-model trajectory under the given truncation policy."""
    if gen is None:
        gen = rng_stream(grid.seed, 0)
    out = backend.model1_run(gen, params.gamma, params.delta, params.x0,
                             grid.dt, grid.horizon, policy.mode == WINDOW,
                             policy.window_factor, False,
                             1 if record else 0, HIT_TOL)
    return _wrap_run(params, grid, out, False, record)


def simulate_model1_thinned(params: Params, grid: SimGrid,
                            policy: TruncationPolicy = TruncationPolicy(),
                            record: bool = False,
                            gen: np.random.Generator | None = None
                            ) -> RatchetRun:
    """Thinned variant: dissociation fallbacks are restricted to molecules
    bound at or after the last renewal (first boundary hit after a boundary
    change); the returned run carries the renewal times and the path values
    there."""
    if gen is None:
        gen = rng_stream(grid.seed, 0)
    out = backend.model1_run(gen, params.gamma, params.delta, params.x0,
                             grid.dt, grid.horizon, policy.mode == WINDOW,
                             policy.window_factor, True,
                             1 if record else 0, HIT_TOL)
    return _wrap_run(params, grid, out, True, record)


class DominationRun:
    """Summary of one shared-noise (full, thinned) pair."""

    def __init__(self, out, record):
        (self.max_thinned_excess_X, self.max_thinned_excess_R,
         self.terminal_X_full, self.terminal_X_thinned,
         self.terminal_R_full, self.terminal_R_thinned,
         self.horizon_used, self.n_events_full, self.n_events_thinned,
         ren_t, ren_X, pt, pXf, pRf, pXh, pRh) = out
        self.renewal_times = ren_t
        self.renewal_X = ren_X
        self.path_full = self.path_thinned = None
        if record:
            self.path_full = PathSample(pt, pXf, pRf, None)
            self.path_thinned = PathSample(pt, pXh, pRh, None)

    @property
    def dominated(self) -> bool:
        """Thinned <= full at every grid time (1e-9 slack absorbs the
        quantile solver's tolerance in X; the boundary order is exact)."""
        return (self.max_thinned_excess_X <= 1e-9
                and self.max_thinned_excess_R <= 0.0)


def simulate_dominated_pair(params: Params, grid: SimGrid,
                            record: bool = False,
                            gen: np.random.Generator | None = None
                            ) -> DominationRun:
    """Full and thinned runs on identical noise (floor truncation, shared
    Poisson points, shared reflection uniforms via a monotone one-step
    coupling), for pathwise-domination checks."""
    if gen is None:
        gen = rng_stream(grid.seed, 0)
    out = backend.model1_pair_run(gen, params.gamma, params.delta, params.x0,
                                  grid.dt, grid.horizon,
                                  1 if record else 0, HIT_TOL)
    return DominationRun(out, record)


def renewal_increments(run: RatchetRun | DominationRun):
    """(delta_sigma, delta_X) pairs between consecutive renewals; their
    ratio of means estimates the speed."""
    ren_t, ren_X = run.renewal_times, run.renewal_X
    if ren_t is None or len(ren_t) < 2:
        raise ValueError("need at least 2 renewal times")
    return np.diff(ren_t), np.diff(ren_X)
