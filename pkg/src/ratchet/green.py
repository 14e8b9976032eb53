"""Green function of killed reflected Brownian motion and closed-form moments.

The generator of reflected BM killed at rate gamma*x + delta is
(1/2)u'' - (gamma x + delta)u; the equation u'' = (2 gamma x + 2 delta)u has
the decreasing solution phi(x) = Ai(s x + a) and the increasing solution
psi(x) = Bi(s x + a) - C Ai(s x + a) with s = (2 gamma)^(1/3),
a = 2^(1/3) delta / gamma^(2/3) and C = Bi'(a)/Ai'(a) chosen so that
psi'(0) = 0 (reflecting boundary).  Their Wronskian is w = s/pi, and the
Green function with respect to the speed measure m(dy) = 2dy is
G(x, y) = psi(min) phi(max) / w.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .airy import SUPPORTED_MAX, airy
from .params import Params

_QUAD_RTOL = 1e-9


@dataclass(frozen=True)
class GreenContext:
    """Frozen ingredients of the Green function for one parameter set."""

    params: Params
    scale: float  # s = (2 gamma)^(1/3)
    shift: float  # a = 2^(1/3) delta / gamma^(2/3)
    C: float
    w: float

    @property
    def x_max(self) -> float:
        """Largest position whose mapped Airy argument stays supported."""
        return (SUPPORTED_MAX - self.shift) / self.scale

    def phi(self, x: float) -> float:
        return airy(self.scale * x + self.shift).ai

    def phi_prime(self, x: float) -> float:
        return self.scale * airy(self.scale * x + self.shift).ai_prime

    def psi(self, x: float) -> float:
        p = airy(self.scale * x + self.shift)
        return p.bi - self.C * p.ai

    def psi_prime(self, x: float) -> float:
        p = airy(self.scale * x + self.shift)
        return self.scale * (p.bi_prime - self.C * p.ai_prime)

    def kill_rate_density(self, y: float) -> float:
        """k(y) = 2 gamma y + 2 delta (killing density w.r.t. Lebesgue)."""
        return 2.0 * self.params.gamma * y + 2.0 * self.params.delta


def green_context(params: Params) -> GreenContext:
    gamma, delta = params.gamma, params.delta
    scale = (2.0 * gamma) ** (1.0 / 3.0)
    shift = 2.0 ** (1.0 / 3.0) * delta / gamma ** (2.0 / 3.0)
    if shift > SUPPORTED_MAX - 2.0:
        raise ValueError("delta/gamma^(2/3) too large for the supported Airy range")
    p0 = airy(shift)
    C = p0.bi_prime / p0.ai_prime
    w = scale / math.pi
    return GreenContext(params=params, scale=scale, shift=shift, C=C, w=w)


def green(ctx: GreenContext, x: float, y: float) -> float:
    """G(x, y) = psi(min) phi(max) / w; symmetric by construction."""
    if x < 0 or y < 0:
        raise ValueError("arguments must be >= 0")
    lo, hi = (x, y) if x <= y else (y, x)
    if hi > ctx.x_max:
        raise ValueError("argument outside supported range")
    return ctx.psi(lo) * ctx.phi(hi) / ctx.w


def kill_position_density(ctx: GreenContext, x: float, y: float) -> float:
    """Density of the pre-kill position for a run started at x."""
    return green(ctx, x, y) * ctx.kill_rate_density(y)


def mean_kill_position(ctx: GreenContext, x: float) -> float:
    """E_x of the pre-kill position: x + phi(x) psi(0) / w, increasing in x
    with minimum phi(0) psi(0) / w at x = 0."""
    if x < 0 or x > ctx.x_max:
        raise ValueError("argument outside supported range")
    return x + ctx.phi(x) * ctx.psi(0.0) / ctx.w


def mean_kill_time(ctx: GreenContext, x: float) -> float:
    """E_x of the kill time: integral of G(x, .) against the speed measure
    m(dy) = 2 dy."""
    if x < 0 or x > ctx.x_max:
        raise ValueError("argument outside supported range")
    upper = _phi_cutoff(ctx)
    lo, _ = quad(ctx.psi, 0.0, min(x, upper), epsrel=_QUAD_RTOL, limit=200)
    hi, _ = quad(ctx.phi, min(x, upper), upper, epsrel=_QUAD_RTOL, limit=200)
    return 2.0 * (ctx.phi(x) * lo + ctx.psi(x) * hi) / ctx.w


def _phi_cutoff(ctx: GreenContext) -> float:
    """x beyond which phi is below ~1e-14 of phi(0)."""
    # Ai(z)/Ai(a) ~ exp(-(2/3)(z^1.5 - a^1.5)); solve for a drop of e^-32.
    a = ctx.shift
    z = (a ** 1.5 + 48.0) ** (2.0 / 3.0)
    return min((z - a) / ctx.scale, ctx.x_max)


