"""Throughput comparison of the compiled and pure-Python kernels.

Usage: python benchmarks/backend_bench.py [--quick]
"""

import argparse
import time

from ratchet import _kernels_py, backend
from ratchet.rng import rng_stream


def _time(fn, *args, repeat=1):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true",
                    help="smaller problem sizes")
    args = ap.parse_args()
    f = 0.1 if args.quick else 1.0

    cases = [
        ("killed_rbm (n=%d, dt=2.5e-4)" % int(20000 * f), "killed_rbm",
         (0.5, 1.0, 1.0, 2.5e-4, int(20000 * f), False)),
        ("model2 (T=%g, dt=1e-3)" % (2000 * f), "model2_run",
         (0.5, 1.0, 0.0, 1e-3, 2000.0 * f, 0, 0)),
        ("model2 active-point (T=%g)" % (2000 * f), "model2_active_run",
         (0.5, 1.0, 0.0, 1e-3, 2000.0 * f, 0, 0)),
        ("model1 floor (T=%g)" % (1000 * f), "model1_run",
         (0.5, 1.0, 0.0, 1e-3, 1000.0 * f, False, 30.0, False, 0, 1e-9)),
        ("model1 window (T=%g)" % (1000 * f), "model1_run",
         (0.5, 1.0, 0.0, 1e-3, 1000.0 * f, True, 30.0, False, 0, 1e-9)),
        ("domination pair (T=%g)" % (200 * f), "model1_pair_run",
         (0.5, 1.0, 0.0, 1e-3, 200.0 * f, 0, 1e-9)),
        ("coupled pair (T=%g)" % (1000 * f), "coupled_pair_run",
         (0.5, 1.0, 0.0, 5.0, 1e-3, 1000.0 * f, 0)),
    ]

    have_ext = backend.BACKEND == "cython"
    print(f"active backend: {backend.BACKEND}")
    print(f"{'kernel':40s} {'python':>10s} {'cython':>10s} {'speedup':>8s}")
    for label, name, kargs in cases:
        t_py = _time(getattr(_kernels_py, name), rng_stream(1, 0), *kargs)
        if have_ext:
            t_cy = _time(getattr(backend, name), rng_stream(1, 0), *kargs)
            print(f"{label:40s} {t_py:9.3f}s {t_cy:9.3f}s {t_py / t_cy:7.1f}x")
        else:
            print(f"{label:40s} {t_py:9.3f}s {'-':>10s} {'-':>8s}")


if __name__ == "__main__":
    main()
