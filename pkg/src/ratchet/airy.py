"""Airy functions Ai, Bi and derivatives on [-10, 40].

Evaluation is table-driven: each argument is routed to the nearest anchor in
a table of high-precision (Ai, Ai', Bi, Bi') values at integer points and
expanded in a local Taylor series whose coefficients follow from the Airy
equation u'' = x u.  A single series centred at 0 is useless here: Ai(x) for
x around 6..9 cancels ~13 of the 16 double digits, while local expansions
with |h| <= 0.5 lose at most one digit.  Beyond the table the standard
asymptotic expansions in zeta = (2/3) x^(3/2) take over; their first omitted
term at the switch point is ~1e-17 relative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

SUPPORTED_MIN = -10.0
SUPPORTED_MAX = 40.0

_SQRT_PI = math.sqrt(math.pi)

# Anchor values (Ai, Ai', Bi, Bi') at integer arguments; 17 significant
# digits, correctly rounded.
_ANCHORS = {
    -10: (0.04024123848644319, 0.99626504413279, -0.3146798296438386, 0.11941411339990923),
    -9: (-0.022133721547341403, -0.9756639809263316, 0.3249473234552449, -0.05740051384366925),
    -8: (-0.0527050503563862, 0.9355609381983065, -0.33125158075113786, -0.1594504978129814),
    -7: (0.18428083525050565, -0.7710081684101265, 0.293762071854414, 0.4982445900581135),
    -6: (-0.3291451736298231, 0.3459354872813429, -0.14669837667055705, -0.812898785105067),
    -5: (0.35076100902411433, 0.32719281855444315, -0.13836913490160058, 0.7784117730018992),
    -4: (-0.07026553294928951, -0.7906285753685813, 0.3922347057069993, -0.1166705674383409),
    -3: (-0.37881429367765806, 0.3145837692165988, -0.19828962637492653, -0.6756112226852585),
    -2: (0.22740742820168558, 0.618259020741691, -0.4123025879563985, 0.2787951669211695),
    -1: (0.5355608832923521, -0.01016056711664521, 0.1039973894969446, 0.5923756264227924),
    0: (0.3550280538878172, -0.2588194037928068, 0.6149266274460007, 0.4482883573538264),
    1: (0.13529241631288141, -0.1591474412967932, 1.2074235949528713, 0.9324359333927756),
    2: (0.03492413042327438, -0.05309038443365363, 3.2980949999782148, 4.10068204993289),
    3: (0.006591139357460719, -0.011912976705951319, 14.037328963730232, 22.92221496638217),
    4: (0.0009515638512048018, -0.001958640950204179, 83.84707140846814, 161.9266835046134),
    5: (0.00010834442813607442, -0.0002474138908684625, 657.7920441711711, 1435.8190802179824),
    6: (9.947694360252889e-06, -2.4765200397034955e-05, 6536.446104809864, 15725.602621930477),
    7: (7.492128863997167e-07, -2.008150894738792e-06, 80327.79070943025, 209552.6708739713),
    8: (4.6922076160992316e-08, -1.3414392979067865e-07, 1199586.00412446, 3354342.3127445388),
    9: (2.47116843087249e-09, -7.480641389658946e-09, 21472868.891435347, 63807489.78090821),
}

_TAYLOR_TERMS = 34
_ASYMPTOTIC_MIN = 9.5
_ASYMPTOTIC_TERMS = 26

# Test hook: a fault-injection offset added to the Bi anchor value at -2.
# Used to demonstrate that a corrupted table entry trips exactly the
# Wronskian validation criterion and nothing else.
_FAULT_OFFSET = 0.0
_FAULT_ANCHOR = -2


def _inject_table_fault(offset: float) -> None:
    global _FAULT_OFFSET
    _FAULT_OFFSET = float(offset)


@dataclass(frozen=True)
class AiryPair:
    """Values of Ai, Bi and their derivatives at one argument."""

    ai: float
    ai_prime: float
    bi: float
    bi_prime: float


def _taylor_eval(anchor: int, h: float):
    """(u, u') for u in {Ai, Bi} via the recurrence
    c_{n+2} = (a*c_n + c_{n-1}) / ((n+1)(n+2))."""
    f0, fp0, g0, gp0 = _ANCHORS[anchor]
    if anchor == _FAULT_ANCHOR and _FAULT_OFFSET != 0.0:
        g0 = g0 + _FAULT_OFFSET
    a = float(anchor)
    out = []
    for c0, c1 in ((f0, fp0), (g0, gp0)):
        cm1 = 0.0
        val = c0 + c1 * h
        der = c1
        hp = h  # h^n for the coefficient being appended
        prev2, prev1 = c0, c1
        for n in range(_TAYLOR_TERMS):
            cn2 = (a * prev2 + cm1) / ((n + 1) * (n + 2))
            hp *= h
            val += cn2 * hp
            der += (n + 2) * cn2 * hp / h if h != 0.0 else 0.0
            cm1, prev2, prev1 = prev2, prev1, cn2
        out.extend((val, der))
    return out  # [ai, ai', bi, bi']


def _asymptotic_eval(x: float):
    """Large-x expansions with the exponential factored out."""
    sqrtx = math.sqrt(x)
    zeta = (2.0 / 3.0) * x * sqrtx
    x14 = math.sqrt(sqrtx)
    # u_k / zeta^k and v_k / zeta^k, v_k = -(6k+1)/(6k-1) u_k
    s_ai = s_bi = 1.0
    s_aip = s_bip = 1.0
    uk = 1.0
    zk = 1.0
    for k in range(1, _ASYMPTOTIC_TERMS):
        uk *= (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / (216.0 * k * (2 * k - 1))
        vk = -uk * (6 * k + 1) / (6 * k - 1)
        zk /= zeta
        tu = uk * zk
        tv = vk * zk
        if k % 2 == 1:
            s_ai -= tu
            s_aip -= tv
        else:
            s_ai += tu
            s_aip += tv
        s_bi += tu
        s_bip += tv
        if abs(tu) < 1e-18 * abs(s_bi):
            break
    em = math.exp(-zeta)
    ep = math.exp(zeta)
    ai = 0.5 * em * s_ai / (_SQRT_PI * x14)
    aip = -0.5 * x14 * em * s_aip / _SQRT_PI
    bi = ep * s_bi / (_SQRT_PI * x14)
    bip = x14 * ep * s_bip / _SQRT_PI
    return ai, aip, bi, bip


def airy(x: float) -> AiryPair:
    """Ai(x), Ai'(x), Bi(x), Bi'(x) for x in [-10, 40]."""
    x = float(x)
    if not (SUPPORTED_MIN <= x <= SUPPORTED_MAX):
        raise ValueError(f"argument {x!r} outside supported range "
                         f"[{SUPPORTED_MIN}, {SUPPORTED_MAX}]")
    if x > _ASYMPTOTIC_MIN:
        return AiryPair(*_asymptotic_eval(x))
    anchor = int(math.floor(x + 0.5))
    anchor = max(-10, min(9, anchor))
    ai, aip, bi, bip = _taylor_eval(anchor, x - anchor)
    return AiryPair(ai, aip, bi, bip)


def ai(x: float) -> float:
    return airy(x).ai


def bi(x: float) -> float:
    return airy(x).bi
