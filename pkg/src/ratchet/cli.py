"""Configuration-driven experiment runner.

Subcommands: simulate, ode, compare, scaling-check, validate.  Values come
from an INI config file (flat sections), overridden by CLI flags; every run
echoes its effective configuration and writes a manifest with checksums of
all emitted files.  Exit codes: 0 ok, 2 config error, 3 runtime error,
4 numerics (shooting bracket) failure.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass, field

from . import __version__
from .backend import BACKEND
from .estimation import (compare_models, estimate_speed_terminal,
                         run_terminal_speeds, scaling_collapse_check)
from .model1 import simulate_model1, simulate_model1_thinned
from .model2 import simulate_model2, simulate_model2_activepoint
from .ode import BracketError, density_fY, solve_speed_ode
from .params import FLOOR, WINDOW, Params, SimGrid, TruncationPolicy
from .rng import rng_stream
from .validate import run_suite

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_NUMERICS = 4

MODELS = ("model1", "model1-thinned", "model2", "model2-activepoint")
FORMATS = ("csv", "json", "gnuplot")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    command: str
    model: str = "model2"
    gamma: float = 0.5
    delta: float = 0.0
    x0: float = 0.0
    dt: float = 1e-3
    horizon: float = 2000.0
    seed: int = 0
    replicates: int = 1
    truncation: str = FLOOR
    window_factor: float = 30.0
    delta_grid: list[float] = field(default_factory=list)
    record: bool = False
    suite: str = "fast"
    output_dir: str = "out"
    formats: list[str] = field(default_factory=lambda: ["csv", "json"])

    def validate(self):
        if self.command == "simulate" and self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}")
        if self.command == "compare" and not self.delta_grid:
            raise ConfigError("compare requires a delta grid")
        if self.command != "compare" and self.command == "simulate" \
                and self.delta_grid:
            raise ConfigError("delta_grid is only valid for compare")
        if self.replicates < 1:
            raise ConfigError("replicates must be >= 1")
        if self.truncation not in (FLOOR, WINDOW):
            raise ConfigError(f"unknown truncation {self.truncation!r}")
        for f in self.formats:
            if f not in FORMATS:
                raise ConfigError(f"unknown format {f!r}")
        try:
            self.params()
            self.grid()
        except ValueError as e:
            raise ConfigError(str(e)) from e

    def params(self) -> Params:
        return Params(gamma=self.gamma, delta=self.delta, x0=self.x0)

    def grid(self) -> SimGrid:
        return SimGrid(dt=self.dt, horizon=self.horizon, seed=self.seed)

    def policy(self) -> TruncationPolicy:
        return TruncationPolicy(self.truncation, self.window_factor)

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["delta_grid"] = list(self.delta_grid)
        d["formats"] = list(self.formats)
        return d


_SECTIONS = {
    "params": ("gamma", "delta", "x0"),
    "grid": ("dt", "horizon", "seed"),
    "run": ("model", "replicates", "truncation", "window_factor",
            "delta_grid", "record", "suite"),
    "output": ("output_dir", "formats"),
}


def load_config_file(path: str, cfg: ExperimentConfig):
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path!r}")
    for section, keys in _SECTIONS.items():
        if not parser.has_section(section):
            continue
        for key in parser.options(section):
            if key not in keys:
                raise ConfigError(f"unknown key [{section}] {key}")
            raw = parser.get(section, key)
            if key in ("gamma", "delta", "x0", "dt", "horizon",
                       "window_factor"):
                setattr(cfg, key, float(raw))
            elif key in ("seed", "replicates"):
                setattr(cfg, key, int(raw))
            elif key == "record":
                setattr(cfg, key, parser.getboolean(section, key))
            elif key == "delta_grid":
                cfg.delta_grid = [float(v) for v in raw.replace(",", " ").split()]
            elif key == "formats":
                cfg.formats = [v for v in raw.replace(",", " ").split()]
            else:
                setattr(cfg, key, raw)
    return cfg


def write_config_ini(cfg: ExperimentConfig, path: str):
    parser = configparser.ConfigParser()
    parser["params"] = {"gamma": repr(cfg.gamma), "delta": repr(cfg.delta),
                        "x0": repr(cfg.x0)}
    parser["grid"] = {"dt": repr(cfg.dt), "horizon": repr(cfg.horizon),
                      "seed": str(cfg.seed)}
    parser["run"] = {"model": cfg.model, "replicates": str(cfg.replicates),
                     "truncation": cfg.truncation,
                     "window_factor": repr(cfg.window_factor),
                     "delta_grid": " ".join(repr(v) for v in cfg.delta_grid),
                     "record": str(cfg.record), "suite": cfg.suite}
    parser["output"] = {"output_dir": cfg.output_dir,
                        "formats": " ".join(cfg.formats)}
    with open(path, "w") as fh:
        parser.write(fh)


# ---------------------------------------------------------------------------
# output helpers

def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


class OutputWriter:
    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.dir = cfg.output_dir
        self.files: list[str] = []
        try:
            os.makedirs(self.dir, exist_ok=True)
            probe = os.path.join(self.dir, ".write_probe")
            with open(probe, "w"):
                pass
            os.remove(probe)
        except OSError as e:
            raise ConfigError(f"output dir not writable: {e}") from e

    def path(self, name):
        self.files.append(name)
        return os.path.join(self.dir, name)

    def csv(self, name, header, rows):
        if "csv" not in self.cfg.formats:
            self.files = [f for f in self.files if f != name]
            return
        with open(self.path(name), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")

    def json(self, name, payload):
        if "json" not in self.cfg.formats:
            return
        with open(self.path(name), "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")

    def gnuplot(self, name, header, rows, plot_lines):
        if "gnuplot" not in self.cfg.formats:
            return
        dat = name + ".dat"
        with open(self.path(dat), "w", encoding="utf-8") as fh:
            fh.write("# " + " ".join(header) + "\n")
            for row in rows:
                fh.write(" ".join(_fmt(v) for v in row) + "\n")
        with open(self.path(name + ".plt"), "w", encoding="utf-8") as fh:
            fh.write("set datafile commentschars '#'\n")
            fh.write(f"datafile = '{dat}'\n")
            for line in plot_lines:
                fh.write(line + "\n")

    def manifest(self, cfg: ExperimentConfig, wall: float):
        payload = {
            "config": cfg.as_dict(),
            "seed": cfg.seed,
            "version": __version__,
            "backend": BACKEND,
            "wall_time_s": wall,
            "outputs": {},
        }
        for name in sorted(set(self.files)):
            p = os.path.join(self.dir, name)
            with open(p, "rb") as fh:
                payload["outputs"][name] = hashlib.sha256(fh.read()).hexdigest()
        with open(os.path.join(self.dir, "manifest.json"), "w",
                  encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _estimate_dict(est) -> dict:
    return {"mean": est.mean, "stderr": est.stderr, "ci_level": est.ci_level,
            "ci_low": est.ci[0], "ci_high": est.ci[1],
            "n_replicates": est.n_replicates, "method": est.method}


# ---------------------------------------------------------------------------
# subcommand drivers

def _run_simulate(cfg: ExperimentConfig, out: OutputWriter):
    params, grid = cfg.params(), cfg.grid()
    policy = cfg.policy()
    speeds = run_terminal_speeds(cfg.model, params, grid, cfg.replicates,
                                 policy) if cfg.replicates > 1 else None
    payload = {"model": cfg.model, "gamma": cfg.gamma, "delta": cfg.delta}
    if speeds is not None:
        est = estimate_speed_terminal(speeds)
        payload["speed"] = _estimate_dict(est)
        out.csv("speeds.csv", ["replicate", "terminal_speed"],
                [(i, s) for i, s in enumerate(speeds)])
        out.gnuplot("speeds", ["replicate", "terminal_speed"],
                    [(i, s) for i, s in enumerate(speeds)],
                    ["plot datafile using 1:2 with points title 'X_T/T'"])
    else:
        gen = rng_stream(grid.seed, 0)
        if cfg.model == "model1":
            run = simulate_model1(params, grid, policy, record=cfg.record,
                                  gen=gen)
        elif cfg.model == "model1-thinned":
            run = simulate_model1_thinned(params, grid, policy,
                                          record=cfg.record, gen=gen)
        elif cfg.model == "model2":
            run = simulate_model2(params, grid, record=cfg.record, gen=gen)
        else:
            run, _ = simulate_model2_activepoint(params, grid,
                                                 record=cfg.record, gen=gen)
        payload["terminal_X"] = run.terminal_X
        payload["terminal_R"] = run.terminal_R
        payload["terminal_speed"] = run.terminal_speed
        payload["n_boundary_events"] = (len(run.events)
                                        if run.events is not None else 0)
        if run.renewal_times is not None:
            payload["n_renewals"] = int(len(run.renewal_times))
            out.csv("renewals.csv", ["sigma", "X_at_sigma"],
                    zip(run.renewal_times, run.renewal_X))
        if run.events is not None and len(run.events):
            out.csv("events.csv", ["time", "old_boundary", "new_boundary",
                                   "cause"],
                    zip(run.events.time, run.events.old_boundary,
                        run.events.new_boundary, run.events.cause_labels()))
        if cfg.record and run.path is not None:
            rows = list(zip(run.path.times, run.path.X, run.path.R))
            out.csv("path.csv", ["t", "X", "R"], rows)
            out.gnuplot("path", ["t", "X", "R"], rows,
                        ["plot datafile using 1:2 with lines title 'X', \\",
                         "     datafile using 1:3 with steps title 'R'"])
    out.json("result.json", payload)


def _run_ode(cfg: ExperimentConfig, out: OutputWriter):
    deltas = cfg.delta_grid or [cfg.delta]
    records = []
    for delta in deltas:
        params = Params(gamma=cfg.gamma, delta=float(delta), x0=cfg.x0)
        sol = solve_speed_ode(params)
        records.append({"gamma": cfg.gamma, "delta": float(delta),
                        "speed": sol.speed, "a_prime_0": sol.a_prime_0,
                        "density_mass": sol.mass,
                        "mean_w_stationary": sol.mean_w_stationary,
                        "mean_eta_stationary": sol.mean_eta_stationary,
                        "z_max": sol.z_max})
        if len(deltas) == 1:
            fy = density_fY(sol, params, sol.z_grid)
            rows = list(zip(sol.z_grid, sol.A, sol.B, fy))
            out.csv("ode_grids.csv", ["z", "A", "B", "f_Y"], rows)
            out.gnuplot("ode_grids", ["z", "A", "B", "f_Y"], rows,
                        ["plot datafile using 1:2 with lines title 'A', \\",
                         "     datafile using 1:3 with lines title 'B', \\",
                         "     datafile using 1:4 with lines title 'f_Y'"])
    payload = records[0] if len(records) == 1 else {"solutions": records}
    out.json("ode.json", payload)
    out.csv("ode.csv", ["gamma", "delta", "speed", "a_prime_0",
                        "density_mass"],
            [(r["gamma"], r["delta"], r["speed"], r["a_prime_0"],
              r["density_mass"]) for r in records])


_F3_HEADER = ["delta",
              "speed_I_floor", "speed_I_floor_lo", "speed_I_floor_hi",
              "speed_I_window", "speed_I_window_lo", "speed_I_window_hi",
              "speed_II_sim", "speed_II_sim_lo", "speed_II_sim_hi",
              "speed_II_ode"]


def _run_compare(cfg: ExperimentConfig, out: OutputWriter):
    table = compare_models(cfg.gamma, cfg.delta_grid, cfg.grid(),
                           cfg.replicates, cfg.window_factor)
    rows = []
    for row in table.rows:
        f, w, s = (row.speed_model1_floor, row.speed_model1_window,
                   row.speed_model2_sim)
        rows.append((row.delta, f.mean, f.ci[0], f.ci[1], w.mean, w.ci[0],
                     w.ci[1], s.mean, s.ci[0], s.ci[1], row.speed_model2_ode))
    out.csv("compare.csv", _F3_HEADER, rows)
    out.gnuplot("compare", _F3_HEADER, rows, [
        "set xlabel 'delta'",
        "set ylabel 'speed'",
        "plot datafile using 1:2:3:4 with yerrorbars title 'full (floor)', \\",
        "     datafile using 1:5:6:7 with yerrorbars title 'full (window)', \\",
        "     datafile using 1:8:9:10 with yerrorbars title 'equilibrium (sim)', \\",
        "     datafile using 1:11 with lines title 'equilibrium (analytic)'",
    ])
    out.json("compare.json", {
        "gamma": cfg.gamma,
        "n_replicates": cfg.replicates,
        "rows": [{
            "delta": row.delta,
            "speed_I_floor": _estimate_dict(row.speed_model1_floor),
            "speed_I_window": _estimate_dict(row.speed_model1_window),
            "speed_II_sim": _estimate_dict(row.speed_model2_sim),
            "speed_II_ode": row.speed_model2_ode,
        } for row in table.rows],
        "max_relative_gap": table.max_relative_gap(),
    })


def _run_scaling(cfg: ExperimentConfig, out: OutputWriter):
    model = "model1" if cfg.model.startswith("model1") else "model2"
    rep = scaling_collapse_check(model, cfg.gamma, cfg.delta, cfg.grid(),
                                 cfg.replicates,
                                 TruncationPolicy(WINDOW, cfg.window_factor))
    out.json("scaling.json", {
        "model": model, "gamma": cfg.gamma, "delta": cfg.delta,
        "estimate": _estimate_dict(rep.estimate),
        "estimate_unit_gamma": _estimate_dict(rep.estimate_unit_gamma),
        "scale": rep.scale,
        "rescaled_mean": rep.rescaled_mean,
        "joint_se": rep.joint_se,
        "collapsed": rep.collapsed,
    })


def _run_validate(cfg: ExperimentConfig, out: OutputWriter):
    results = run_suite(cfg.suite, seed=cfg.seed or 20_260_101)
    payload = {"suite": cfg.suite, "all_passed": all(r.passed for r in results),
               "criteria": [{
                   "id": r.cid, "name": r.name, "passed": r.passed,
                   "seconds": r.seconds,
                   "checks": [{"label": c[0], "passed": c[1],
                               "observed": c[2], "expected": c[3],
                               "tolerance": c[4]} for c in r.checks],
               } for r in results]}
    out.json("validation.json", payload)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ratchet",
        description="Broken Brownian ratchet simulation and analysis")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="INI config file")
        p.add_argument("--gamma", type=float)
        p.add_argument("--delta", type=float)
        p.add_argument("--x0", type=float)
        p.add_argument("--dt", type=float)
        p.add_argument("--horizon", type=float)
        p.add_argument("--replicates", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--out", dest="output_dir")
        p.add_argument("--format", dest="formats", action="append",
                       choices=FORMATS)

    p = sub.add_parser("simulate", help="run one model")
    common(p)
    p.add_argument("--model", choices=MODELS)
    p.add_argument("--truncation", choices=[FLOOR, WINDOW])
    p.add_argument("--window-factor", dest="window_factor", type=float)
    p.add_argument("--record", action="store_true", default=None)

    p = sub.add_parser("ode", help="solve the speed boundary-value problem")
    common(p)
    p.add_argument("--delta-grid", dest="delta_grid")

    p = sub.add_parser("compare", help="speed table for both models")
    common(p)
    p.add_argument("--delta-grid", dest="delta_grid")
    p.add_argument("--window-factor", dest="window_factor", type=float)

    p = sub.add_parser("scaling-check", help="scaling-collapse report")
    common(p)
    p.add_argument("--model", choices=("model1", "model2"))

    p = sub.add_parser("validate", help="run the acceptance criteria")
    common(p)
    p.add_argument("--suite", choices=("fast", "full"))
    return ap


def config_from_args(args) -> ExperimentConfig:
    cfg = ExperimentConfig(command=args.command)
    if args.command == "validate":
        cfg.formats = ["json"]
    if getattr(args, "config", None):
        load_config_file(args.config, cfg)
    for key in ("model", "gamma", "delta", "x0", "dt", "horizon",
                "replicates", "seed", "output_dir", "truncation",
                "window_factor", "record", "suite"):
        v = getattr(args, key, None)
        if v is not None:
            setattr(cfg, key, v)
    if getattr(args, "formats", None):
        cfg.formats = list(dict.fromkeys(args.formats))
    dg = getattr(args, "delta_grid", None)
    if dg is not None and not isinstance(dg, list):
        cfg.delta_grid = [float(v) for v in dg.replace(",", " ").split()]
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    t0 = time.time()
    try:
        cfg = config_from_args(args)
        out = OutputWriter(cfg)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "simulate":
            _run_simulate(cfg, out)
        elif args.command == "ode":
            _run_ode(cfg, out)
        elif args.command == "compare":
            _run_compare(cfg, out)
        elif args.command == "scaling-check":
            _run_scaling(cfg, out)
        elif args.command == "validate":
            _run_validate(cfg, out)
        write_config_ini(cfg, os.path.join(out.dir, "config.ini"))
        out.files.append("config.ini")
        out.manifest(cfg, time.time() - t0)
    except BracketError as e:
        print(f"numerics error: {e}", file=sys.stderr)
        return EXIT_NUMERICS
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as e:  # noqa: BLE001 - map any runtime failure to 3
        print(f"runtime error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
