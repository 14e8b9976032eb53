"""Speed estimators, the cumulative-process decomposition, and the
scaling-collapse / model-comparison drivers."""

from __future__ import annotations

import os
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm
from scipy.stats import t as student_t

from .model1 import renewal_increments, simulate_model1, simulate_model1_thinned
from .model2 import simulate_model2, simulate_model2_activepoint
from .ode import solve_speed_ode
from .params import (FLOOR, WINDOW, JumpChain, Params, RatchetRun, SimGrid,
                     TruncationPolicy)
from .rng import replicate_stream

MODEL_NAMES = ("model1", "model1-thinned", "model2", "model2-activepoint")


@dataclass(frozen=True)
class SpeedEstimate:
    mean: float
    stderr: float
    ci_level: float
    ci: tuple[float, float]
    n_replicates: int
    method: str
    jackknife_se: float | None = None

    def covers(self, value: float) -> bool:
        return self.ci[0] <= value <= self.ci[1]

    def agrees_with(self, other: "SpeedEstimate", n_se: float = 3.0,
                    scale: float = 1.0) -> bool:
        """|mean - scale*other.mean| within the joint n_se band."""
        joint = np.hypot(self.stderr, scale * other.stderr)
        return abs(self.mean - scale * other.mean) <= n_se * joint


@dataclass(frozen=True)
class CumulativeDecomposition:
    """X_T = S + remainder with S the sum of completed renewal increments."""

    n_renewals: int
    S: float
    remainder: float
    terminal_X: float
    horizon: float

    @property
    def identity_residual(self) -> float:
        return abs(self.terminal_X - self.S - self.remainder)

    @property
    def remainder_rate(self) -> float:
        return self.remainder / self.horizon


def how_many_threads() -> int:
    try:
        return max(1, int(os.environ.get("RATCHET_THREADS", "1")))
    except ValueError:
        return 1


def _experiment_block(model: str, params: Params, grid: SimGrid,
                      mode: str) -> int:
    """Stable stream-block id for one sub-experiment, so different
    experiments sharing a seed never reuse stream ids."""
    tag = (f"{model}|{params.gamma:.17g}|{params.delta:.17g}|"
           f"{params.x0:.17g}|{grid.dt:.17g}|{grid.horizon:.17g}|{mode}")
    return zlib.crc32(tag.encode()) & 0x7FFFFFFF


def _one_replicate(args):
    model, params, grid, policy, i, block = args
    gen = replicate_stream(grid.seed, block, i)
    if model == "model1":
        run = simulate_model1(params, grid, policy, gen=gen)
    elif model == "model1-thinned":
        run = simulate_model1_thinned(params, grid, policy, gen=gen)
    elif model == "model2":
        run = simulate_model2(params, grid, gen=gen)
    elif model == "model2-activepoint":
        run, _ = simulate_model2_activepoint(params, grid, gen=gen)
    else:
        raise ValueError(f"unknown model {model!r}")
    return run.terminal_speed


def run_terminal_speeds(model: str, params: Params, grid: SimGrid, n: int,
                        policy: TruncationPolicy = TruncationPolicy()
                        ) -> np.ndarray:
    """X_T/T over n replicates on disjoint streams (parallel over processes
    when RATCHET_THREADS > 1)."""
    if model not in MODEL_NAMES:
        raise ValueError(f"unknown model {model!r}")
    block = _experiment_block(model, params, grid, policy.mode)
    jobs = [(model, params, grid, policy, i, block) for i in range(n)]
    workers = how_many_threads()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return np.fromiter(pool.map(_one_replicate, jobs,
                                        chunksize=max(1, n // (4 * workers))),
                               dtype=float, count=n)
    return np.fromiter(map(_one_replicate, jobs), dtype=float, count=n)


def estimate_speed_terminal(speeds, ci_level: float = 0.95) -> SpeedEstimate:
    """Mean and t-interval of per-replicate terminal speeds X_T/T.

    Accepts an array of speeds or a list of runs with a common horizon.
    """
    if len(speeds) and isinstance(speeds[0], RatchetRun):
        horizons = {r.horizon_used for r in speeds}
        if len(horizons) != 1:
            raise ValueError("replicates must share a common horizon")
        speeds = [r.terminal_speed for r in speeds]
    x = np.asarray(speeds, dtype=float)
    if x.size < 2:
        raise ValueError("need >= 2 replicates")
    mean = float(x.mean())
    se = float(x.std(ddof=1) / np.sqrt(x.size))
    half = se * float(student_t.ppf(0.5 + ci_level / 2.0, x.size - 1))
    return SpeedEstimate(mean=mean, stderr=se, ci_level=ci_level,
                         ci=(mean - half, mean + half),
                         n_replicates=x.size, method="terminal")


def _ratio_with_se(dx, ds, n_batches=100):
    """Ratio-of-means estimate with a delta-method standard error computed
    on batch means (robust to serial correlation of the increments)."""
    dx = np.asarray(dx, dtype=float)
    ds = np.asarray(ds, dtype=float)
    n = dx.size
    k = min(n_batches, n // 10) or 1
    m = n // k
    bx = dx[: m * k].reshape(k, m).mean(axis=1)
    bs = ds[: m * k].reshape(k, m).mean(axis=1)
    ratio = dx.mean() / ds.mean()
    g = bx - ratio * bs
    se = float(np.std(g, ddof=1) / (np.sqrt(k) * bs.mean()))
    # delete-one-batch jackknife cross-check
    jack = None
    if n >= 5000:
        sx, ss = bx.sum(), bs.sum()
        loo = (sx - bx) / (ss - bs)
        jack = float(np.sqrt((k - 1) / k * np.sum((loo - loo.mean()) ** 2)))
    return ratio, se, jack


def estimate_speed_renewal(source, burn_in: float = 0.2,
                           ci_level: float = 0.95) -> SpeedEstimate:
    """Ratio estimator mean(space increments)/mean(time increments).

    ``source`` may be a JumpChain (boundary displacements over inter-jump
    times), a (delta_sigma, delta_X) pair from renewal_increments, or a
    thinned-model run.
    """
    if isinstance(source, JumpChain):
        n0 = int(len(source) * burn_in)
        dx, ds = source.W[n0:], source.eta[n0:]
    elif isinstance(source, RatchetRun):
        ds, dx = renewal_increments(source)
        n0 = int(len(dx) * burn_in)
        dx, ds = dx[n0:], ds[n0:]
    else:
        ds, dx = source
        n0 = int(len(dx) * burn_in)
        dx, ds = np.asarray(dx)[n0:], np.asarray(ds)[n0:]
    if len(dx) < 1000:
        raise ValueError(f"need >= 1000 post-burn-in increments, have {len(dx)}")
    ratio, se, jack = _ratio_with_se(dx, ds)
    half = se * float(norm.ppf(0.5 + ci_level / 2.0))
    return SpeedEstimate(mean=float(ratio), stderr=se, ci_level=ci_level,
                         ci=(ratio - half, ratio + half),
                         n_replicates=len(dx), method="renewal",
                         jackknife_se=jack)


def decompose_cumulative(run: RatchetRun) -> CumulativeDecomposition:
    """Split a thinned-model trajectory into the sum of completed renewal
    increments plus the remainder (head before the first renewal plus the
    incomplete final cycle); the identity X_T = S + remainder is exact."""
    if run.renewal_times is None:
        raise ValueError("run carries no renewal times (not a thinned run)")
    if len(run.renewal_times) == 0:
        raise ValueError("empty renewal set")
    rX = run.renewal_X
    S = float(rX[-1] - rX[0])
    remainder = float(rX[0] + run.terminal_X - rX[-1])
    return CumulativeDecomposition(n_renewals=len(rX) - 1, S=S,
                                   remainder=remainder,
                                   terminal_X=run.terminal_X,
                                   horizon=run.horizon_used)


@dataclass(frozen=True)
class ScalingReport:
    model: str
    gamma: float
    delta: float
    estimate: SpeedEstimate
    estimate_unit_gamma: SpeedEstimate
    scale: float  # gamma^(1/3)

    @property
    def rescaled_mean(self) -> float:
        return self.scale * self.estimate_unit_gamma.mean

    @property
    def joint_se(self) -> float:
        return float(np.hypot(self.estimate.stderr,
                              self.scale * self.estimate_unit_gamma.stderr))

    @property
    def collapsed(self) -> bool:
        return abs(self.estimate.mean - self.rescaled_mean) <= 3 * self.joint_se


def scaling_collapse_check(model: str, gamma: float, delta: float,
                           grid: SimGrid, n: int,
                           policy: TruncationPolicy = TruncationPolicy(WINDOW)
                           ) -> ScalingReport:
    """Compare speed(gamma, delta) against gamma^(1/3) *
    speed(1, delta * gamma^(-2/3)), estimated independently."""
    p1 = Params(gamma=gamma, delta=delta)
    p2 = Params(gamma=1.0, delta=delta * gamma ** (-2.0 / 3.0))
    est1 = estimate_speed_terminal(run_terminal_speeds(model, p1, grid, n, policy))
    est2 = estimate_speed_terminal(run_terminal_speeds(model, p2, grid, n, policy))
    return ScalingReport(model=model, gamma=gamma, delta=delta, estimate=est1,
                         estimate_unit_gamma=est2, scale=gamma ** (1.0 / 3.0))


@dataclass(frozen=True)
class CompareRow:
    delta: float
    speed_model1_floor: SpeedEstimate
    speed_model1_window: SpeedEstimate
    speed_model2_sim: SpeedEstimate
    speed_model2_ode: float


@dataclass(frozen=True)
class CompareTable:
    """Per-delta speeds of both models (the simulation-study dataset)."""

    gamma: float
    grid: SimGrid
    n_replicates: int
    rows: list[CompareRow] = field(default_factory=list)

    def max_relative_gap(self) -> float:
        worst = 0.0
        for row in self.rows:
            for est in (row.speed_model1_floor, row.speed_model1_window):
                worst = max(worst, abs(est.mean - row.speed_model2_sim.mean)
                            / row.speed_model2_sim.mean)
        return worst


def compare_models(gamma: float, delta_grid, grid: SimGrid, n: int,
                   window_factor: float = 30.0,
                   ci_level: float = 0.95) -> CompareTable:
    """Estimate, per delta: full-model speed under both truncation policies,
    the equilibrium-model speed, and the boundary-value-problem speed."""
    rows = []
    for delta in delta_grid:
        params = Params(gamma=gamma, delta=float(delta))
        floor_est = estimate_speed_terminal(
            run_terminal_speeds("model1", params, grid, n,
                                TruncationPolicy(FLOOR)), ci_level)
        window_est = estimate_speed_terminal(
            run_terminal_speeds("model1", params, grid, n,
                                TruncationPolicy(WINDOW, window_factor)),
            ci_level)
        m2_est = estimate_speed_terminal(
            run_terminal_speeds("model2", params, grid, n), ci_level)
        ode_speed = solve_speed_ode(params).speed
        rows.append(CompareRow(delta=float(delta),
                               speed_model1_floor=floor_est,
                               speed_model1_window=window_est,
                               speed_model2_sim=m2_est,
                               speed_model2_ode=ode_speed))
    return CompareTable(gamma=gamma, grid=grid, n_replicates=n, rows=rows)
