"""Stochastic simulation and numerical analysis of the broken Brownian
ratchet (diffusing protein, binding/unbinding ratcheting molecules)."""

__version__ = "0.1.0"

from .backend import BACKEND
from .core import (sample_kill_statistics, sample_killed_reflected_bm,
                   sample_poisson_points)
from .estimation import (CompareTable, CumulativeDecomposition, SpeedEstimate,
                         compare_models, decompose_cumulative,
                         estimate_speed_renewal, estimate_speed_terminal,
                         run_terminal_speeds, scaling_collapse_check)
from .green import GreenContext, green, green_context, mean_kill_position, mean_kill_time
from .model1 import (renewal_increments, simulate_dominated_pair,
                     simulate_model1, simulate_model1_thinned)
from .model2 import (simulate_coupled_pair, simulate_model2,
                     simulate_model2_activepoint, stationary_jump_statistics)
from .ode import (BracketError, OdeSolution, classifier_scan, density_fY,
                  solve_speed_ode, speed_delta0)
from .params import (FLOOR, WINDOW, JumpChain, JumpRecord, KilledPathResult,
                     Params, PathSample, PoissonPoint, RatchetRun, SimGrid,
                     TruncationPolicy)
from .rng import rng_stream, sample_brownian_increment

__all__ = [
    "BACKEND", "BracketError", "CompareTable", "CumulativeDecomposition",
    "FLOOR", "GreenContext", "JumpChain", "JumpRecord", "KilledPathResult",
    "OdeSolution", "Params", "PathSample", "PoissonPoint", "RatchetRun",
    "SimGrid", "SpeedEstimate", "TruncationPolicy", "WINDOW",
    "classifier_scan", "compare_models", "decompose_cumulative",
    "density_fY", "estimate_speed_renewal", "estimate_speed_terminal",
    "green", "green_context", "mean_kill_position", "mean_kill_time",
    "renewal_increments", "rng_stream", "run_terminal_speeds",
    "sample_brownian_increment", "sample_kill_statistics",
    "sample_killed_reflected_bm", "sample_poisson_points",
    "scaling_collapse_check", "simulate_coupled_pair",
    "simulate_dominated_pair", "simulate_model1", "simulate_model1_thinned",
    "simulate_model2", "simulate_model2_activepoint", "solve_speed_ode",
    "speed_delta0", "stationary_jump_statistics",
]
