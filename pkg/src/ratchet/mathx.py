"""Small numerical helpers shared by both simulation backends."""

from __future__ import annotations

import numpy as np

# Wichura's AS 241 rational approximations of the standard normal quantile
# (PPND16, ~1e-15 relative accuracy).  Both backends map uniforms to normals
# through this one fixed function, so a backend's output is reproducible for
# a given Philox stream.

_A = (
    3.3871328727963666080e0,
    1.3314166789178437745e2,
    1.9715909503065514427e3,
    1.3731693765509461125e4,
    4.5921953931549871457e4,
    6.7265770927008700853e4,
    3.3430575583588128105e4,
    2.5090809287301226727e3,
)
_B = (
    1.0,
    4.2313330701600911252e1,
    6.8718700749205790830e2,
    5.3941960214247511077e3,
    2.1213794301586595867e4,
    3.9307895800092710610e4,
    2.8729085735721942674e4,
    5.2264952788528545610e3,
)
_C = (
    1.42343711074968357734e0,
    4.63033784615654529590e0,
    5.76949722146069140550e0,
    3.64784832476320460504e0,
    1.27045825245236838258e0,
    2.41780725177450611770e-1,
    2.27238449892691845833e-2,
    7.74545014278341407640e-4,
)
_D = (
    1.0,
    2.05319162663775882187e0,
    1.67638483018380384940e0,
    6.89767334985100004550e-1,
    1.48103976427480074590e-1,
    1.51986665636164571966e-2,
    5.47593808499534494600e-4,
    1.05075007164441684324e-9,
)
_E = (
    6.65790464350110377720e0,
    5.46378491116411436990e0,
    1.78482653991729133580e0,
    2.96560571828504891230e-1,
    2.65321895265761230930e-2,
    1.24266094738807843860e-3,
    2.71155556874348757815e-5,
    2.01033439929228813265e-7,
)
_F = (
    1.0,
    5.99832206555887937690e-1,
    1.36929880922735805310e-1,
    1.48753612908506148525e-2,
    7.86869131145613259100e-4,
    1.84631831751005468180e-5,
    1.42151175831644588870e-7,
    2.04426310338993978564e-15,
)


def _poly(coeffs, r):
    acc = np.full_like(r, coeffs[7])
    for c in coeffs[6::-1]:
        acc = acc * r + c
    return acc


def inv_norm_cdf(p):
    """Standard normal quantile of ``p`` in (0, 1), vectorised."""
    p = np.asarray(p, dtype=float)
    scalar = p.ndim == 0
    p = np.atleast_1d(p)
    out = np.empty_like(p)

    q = p - 0.5
    central = np.abs(q) <= 0.425
    if np.any(central):
        r = 0.180625 - q[central] * q[central]
        out[central] = q[central] * _poly(_A, r) / _poly(_B, r)
    tails = ~central
    if np.any(tails):
        qt = q[tails]
        r = np.where(qt < 0, p[tails], 1.0 - p[tails])
        r = np.sqrt(-np.log(r))
        mid = r <= 5.0
        z = np.empty_like(r)
        if np.any(mid):
            rm = r[mid] - 1.6
            z[mid] = _poly(_C, rm) / _poly(_D, rm)
        if np.any(~mid):
            rf = r[~mid] - 5.0
            z[~mid] = _poly(_E, rf) / _poly(_F, rf)
        out[tails] = np.where(qt < 0, -z, z)
    return out[0] if scalar else out


def centered_uniform(raw_uint64):
    """Map raw 64-bit words to uniforms strictly inside (0, 1) at the centers
    of the 2^53 grid cells (matches the compiled kernels' convention)."""
    return ((raw_uint64 >> np.uint64(11)).astype(np.float64) + 0.5) * (2.0**-53)


def batch_means_se(x, n_batches: int = 64):
    """Standard error of the mean of a (possibly autocorrelated) stationary
    sequence via non-overlapping batch means."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 2 * n_batches:
        n_batches = max(2, n // 2)
    m = n // n_batches
    if m < 1:
        raise ValueError("not enough data for batch means")
    batches = x[: m * n_batches].reshape(n_batches, m).mean(axis=1)
    return float(batches.std(ddof=1) / np.sqrt(n_batches))
