"""Counter-based splittable random streams.

Every stochastic routine takes a stream built by :func:`rng_stream`.  Streams
are keyed Philox generators: the 128-bit key is (seed, stream_id), so any two
distinct (seed, stream_id) pairs yield independent, non-overlapping streams
and replicates can be fanned out across workers without coordination.
"""

from __future__ import annotations

import numpy as np

# Distinct high-word blocks keep sub-experiments that share one user seed on
# disjoint stream ids.
_BLOCK = 1 << 32


def rng_stream(seed: int, stream_id: int = 0) -> np.random.Generator:
    """Deterministic stream for (seed, stream_id); single-owner, not shared
    across threads."""
    seed = int(seed)
    stream_id = int(stream_id)
    if not (0 <= seed < 2**64):
        raise ValueError("seed must be a 64-bit unsigned integer")
    if not (0 <= stream_id < 2**64):
        raise ValueError("stream_id must be a 64-bit unsigned integer")
    return np.random.Generator(np.random.Philox(key=(seed << 64) | stream_id))


def replicate_stream(seed: int, block: int, replicate: int) -> np.random.Generator:
    """Stream for replicate ``replicate`` of sub-experiment ``block``."""
    if not (0 <= replicate < _BLOCK):
        raise ValueError("replicate index out of range")
    return rng_stream(seed, block * _BLOCK + replicate)


def sample_brownian_increment(stream: np.random.Generator, dt: float, size=None):
    """Gaussian increment(s) with mean 0 and variance ``dt``."""
    if not dt > 0:
        raise ValueError("dt must be > 0")
    from .mathx import inv_norm_cdf

    u = stream.random(size)
    return inv_norm_cdf(u) * np.sqrt(dt)
