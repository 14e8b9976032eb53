"""Kernel backend selection.

The compiled extension is preferred; the numpy fallback is used when the
extension is missing or when RATCHET_BACKEND=python is set.  Both backends
implement identical stepping semantics (deterministic per backend for a
given stream, equal in law across backends).
"""

from __future__ import annotations

import os

from . import _kernels_py

_forced = os.environ.get("RATCHET_BACKEND", "").strip().lower()

_ext = None
if _forced != "python":
    try:
        from . import _kernels as _ext
    except ImportError:
        _ext = None
        if _forced == "cython":
            raise

BACKEND = "cython" if _ext is not None else "python"


def _wrap(name):
    ext_fn = getattr(_ext, name)

    def run(gen, *args):
        return ext_fn(gen.bit_generator, *args)

    run.__name__ = name
    return run


if _ext is not None:
    killed_rbm = _wrap("killed_rbm")
    model2_run = _wrap("model2_run")
    model2_active_run = _wrap("model2_active_run")
    coupled_pair_run = _wrap("coupled_pair_run")
    model1_run = _wrap("model1_run")
    model1_pair_run = _wrap("model1_pair_run")
else:
    killed_rbm = _kernels_py.killed_rbm
    model2_run = _kernels_py.model2_run
    model2_active_run = _kernels_py.model2_active_run
    coupled_pair_run = _kernels_py.coupled_pair_run
    model1_run = _kernels_py.model1_run
    model1_pair_run = _kernels_py.model1_pair_run


def python_backend():
    """The fallback module itself (for benchmarks and cross-checks)."""
    return _kernels_py
