"""Shared domain types: model parameters, simulation grids, run results."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

FLOOR = "floor"
WINDOW = "equilibrium-window"

CAUSE_BINDING = "new-binding"
CAUSE_DISSOCIATION = "dissociation"


@dataclass(frozen=True)
class Params:
    """Rates of the broken ratchet: binding rate per unit length ``gamma``,
    dissociation rate ``delta``, initial offset ``x0`` of the diffusing
    coordinate above the boundary."""

    gamma: float
    delta: float = 0.0
    x0: float = 0.0

    def __post_init__(self):
        for name in ("gamma", "delta", "x0"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
        if self.gamma <= 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma!r}")
        if self.delta < 0:
            raise ValueError(f"delta must be >= 0, got {self.delta!r}")
        if self.x0 < 0:
            raise ValueError(f"x0 must be >= 0, got {self.x0!r}")


@dataclass(frozen=True)
class SimGrid:
    """Euler grid: step ``dt``, total time ``horizon``, replicate ``seed``."""

    dt: float = 1e-3
    horizon: float = 1000.0
    seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be > 0, got {self.dt!r}")
        if not (math.isfinite(self.horizon) and self.horizon > 0):
            raise ValueError(f"horizon must be > 0, got {self.horizon!r}")
        if self.dt > self.horizon:
            raise ValueError("dt must not exceed horizon")
        if self.horizon / self.dt > 2**62:
            raise ValueError("horizon/dt does not fit in a machine integer")
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.dt))


@dataclass(frozen=True)
class TruncationPolicy:
    """How the infinite binding region below the boundary is truncated.

    ``floor`` pins the fallback boundary at 0 and only materialises bindings
    in [0, X_t] (the choice used for the reference simulation study; it
    overstates the speed for large delta).  ``equilibrium-window``
    materialises bindings in [R_t - window_factor*delta/gamma, X_t] and, if a
    dissociation finds the window empty, draws the fallback boundary from the
    stationary gap law Exp(gamma/delta) below the window edge.
    """

    mode: str = FLOOR
    window_factor: float = 30.0

    def __post_init__(self):
        if self.mode not in (FLOOR, WINDOW):
            raise ValueError(f"mode must be {FLOOR!r} or {WINDOW!r}, got {self.mode!r}")
        if self.mode == WINDOW and self.window_factor < 10:
            raise ValueError("window_factor must be >= 10")


@dataclass(frozen=True)
class PoissonPoint:
    """One ratcheting molecule: binds at time ``tau`` at position ``r`` and
    stays bound for ``z`` time units (``z is None`` means it never
    dissociates)."""

    tau: float
    r: float
    z: float | None

    def __post_init__(self):
        if not math.isfinite(self.tau) or self.tau < 0:
            raise ValueError("tau must be finite and >= 0")
        if self.z is not None and not (math.isfinite(self.z) and self.z > 0):
            raise ValueError("z must be > 0 or None")


@dataclass(frozen=True)
class KilledPathResult:
    """Outcome of one killed reflected-BM run: first grid time at which the
    integrated hazard exceeds the exponential level, and the position at the
    preceding grid time."""

    kill_time: float
    kill_position: float
    path: np.ndarray | None = None  # shape (n, 2) rows of (t, value)


class BoundaryEventLog:
    """Columnar log of reflection-boundary changes."""

    __slots__ = ("time", "old_boundary", "new_boundary", "cause")

    def __init__(self, time, old_boundary, new_boundary, cause):
        self.time = np.asarray(time, dtype=float)
        self.old_boundary = np.asarray(old_boundary, dtype=float)
        self.new_boundary = np.asarray(new_boundary, dtype=float)
        # cause: +1 new-binding, -1 dissociation
        self.cause = np.asarray(cause, dtype=np.int8)

    def __len__(self):
        return self.time.size

    def cause_labels(self):
        return np.where(self.cause > 0, CAUSE_BINDING, CAUSE_DISSOCIATION)


@dataclass
class PathSample:
    """Discretised trajectory of (X_t, R_t) with its boundary-event log."""

    times: np.ndarray
    X: np.ndarray
    R: np.ndarray
    jumps: BoundaryEventLog


@dataclass(frozen=True)
class JumpRecord:
    """One step of the jump-time chain: post-jump gap ``Y``, boundary
    displacement ``W`` and inter-jump time ``eta``."""

    Y: float
    W: float
    eta: float

    @property
    def direction(self) -> str:
        return "up" if self.W > 0 else "down"


class JumpChain:
    """Columnar sequence of jump records (supports len/indexing/slicing)."""

    __slots__ = ("t", "Y", "W", "eta")

    def __init__(self, t, Y, W, eta):
        self.t = np.asarray(t, dtype=float)
        self.Y = np.asarray(Y, dtype=float)
        self.W = np.asarray(W, dtype=float)
        self.eta = np.asarray(eta, dtype=float)

    def __len__(self):
        return self.Y.size

    def __getitem__(self, i):
        if isinstance(i, slice):
            return JumpChain(self.t[i], self.Y[i], self.W[i], self.eta[i])
        return JumpRecord(float(self.Y[i]), float(self.W[i]), float(self.eta[i]))

    @property
    def up(self) -> np.ndarray:
        return self.W > 0


@dataclass
class RatchetRun:
    """Result of one ratchet simulation (either model)."""

    params: Params
    grid: SimGrid
    terminal_X: float
    terminal_R: float
    path: PathSample | None = None
    events: BoundaryEventLog | None = None
    jumps: JumpChain | None = None
    renewal_times: np.ndarray | None = None
    renewal_X: np.ndarray | None = None
    horizon_used: float = 0.0
    n_bindings: int = 0
    n_dissociations: int = 0
    n_synthetic_fallbacks: int = 0

    @property
    def terminal_speed(self) -> float:
        return self.terminal_X / self.horizon_used


@dataclass
class CoupledRunResult:
    """Two ratchets driven by shared noise until their active points merge.

    ``coupling_time`` is None when the horizon was exhausted first.
    """

    coupling_time: float | None
    terminal_X1: float
    terminal_X2: float
    jumps_after_coupling: int
    max_active_point_gap_after: float
    path1: PathSample | None = None
    path2: PathSample | None = None

    @property
    def coupled(self) -> bool:
        return self.coupling_time is not None
