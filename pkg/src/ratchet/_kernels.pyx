# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled per-step simulation kernels.

All kernels draw from a numpy BitGenerator through its C interface; uniforms
are taken at the centers of the 2^53 grid cells (strictly inside (0, 1)) and
normals come from the AS 241 rational inverse normal CDF, so a kernel's
output stream is a deterministic function of (seed, stream_id) for a given
build.  The pure-Python backend implements the same per-step semantics.
"""

import numpy as np

cimport numpy as cnp
from cpython.mem cimport PyMem_Free, PyMem_Malloc, PyMem_Realloc
from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport INFINITY, erf, exp, fabs, log, log1p, sqrt
from numpy.random cimport bitgen_t

cnp.import_array()

DEF SQRT2 = 1.4142135623730951


# ---------------------------------------------------------------------------
# random primitives

cdef inline bitgen_t *get_bitgen(object bit_generator) except NULL:
    return <bitgen_t *> PyCapsule_GetPointer(bit_generator.capsule,
                                             "BitGenerator")


cdef inline double next_u(bitgen_t *rng) noexcept nogil:
    # cell-centred uniform in (0, 1)
    return (<double> (rng.next_uint64(rng.state) >> 11) + 0.5) * (2.0 ** -53)


cdef inline double next_exp(bitgen_t *rng) noexcept nogil:
    return -log1p(-next_u(rng))


cdef double ppnd16(double p) noexcept nogil:
    # Wichura's AS 241 inverse normal CDF
    cdef double q = p - 0.5
    cdef double r, num, den
    if fabs(q) <= 0.425:
        r = 0.180625 - q * q
        num = (((((((2.5090809287301226727e3 * r +
                     3.3430575583588128105e4) * r +
                    6.7265770927008700853e4) * r +
                   4.5921953931549871457e4) * r +
                  1.3731693765509461125e4) * r +
                 1.9715909503065514427e3) * r +
                1.3314166789178437745e2) * r +
               3.3871328727963666080e0)
        den = (((((((5.2264952788528545610e3 * r +
                     2.8729085735721942674e4) * r +
                    3.9307895800092710610e4) * r +
                   2.1213794301586595867e4) * r +
                  5.3941960214247511077e3) * r +
                 6.8718700749205790830e2) * r +
                4.2313330701600911252e1) * r + 1.0)
        return q * num / den
    if q < 0:
        r = p
    else:
        r = 1.0 - p
    r = sqrt(-log(r))
    if r <= 5.0:
        r -= 1.6
        num = (((((((7.74545014278341407640e-4 * r +
                     2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) * r +
                   1.27045825245236838258e0) * r +
                  3.64784832476320460504e0) * r +
                 5.76949722146069140550e0) * r +
                4.63033784615654529590e0) * r +
               1.42343711074968357734e0)
        den = (((((((1.05075007164441684324e-9 * r +
                     5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) * r +
                   1.48103976427480074590e-1) * r +
                  6.89767334985100004550e-1) * r +
                 1.67638483018380384940e0) * r +
                2.05319162663775882187e0) * r + 1.0)
    else:
        r -= 5.0
        num = (((((((2.01033439929228813265e-7 * r +
                     2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) * r +
                   2.65321895265761230930e-2) * r +
                  2.96560571828504891230e-1) * r +
                 1.78482653991729133580e0) * r +
                5.46378491116411436990e0) * r +
               6.65790464350110377720e0)
        den = (((((((2.04426310338993978564e-15 * r +
                     1.42151175831644588870e-7) * r +
                    1.84631831751005468180e-5) * r +
                   7.86869131145613259100e-4) * r +
                  1.48753612908506148525e-2) * r +
                 1.36929880922735805310e-1) * r +
                5.99832206555887937690e-1) * r + 1.0)
    if q < 0:
        return -num / den
    return num / den


cdef inline double next_normal(bitgen_t *rng) noexcept nogil:
    return ppnd16(next_u(rng))


cdef inline long next_poisson(bitgen_t *rng, double lam) noexcept nogil:
    # inversion; fine for the small per-step intensities used here
    cdef double u = next_u(rng)
    cdef double p = exp(-lam)
    cdef double c = p
    cdef long k = 0
    while u > c and k < 200:
        k += 1
        p *= lam / k
        c += p
    return k


# ---------------------------------------------------------------------------
# growable buffers

cdef class Buf:
    cdef double *data
    cdef Py_ssize_t size, cap

    def __cinit__(self, Py_ssize_t cap=256):
        self.cap = cap if cap > 0 else 16
        self.size = 0
        self.data = <double *> PyMem_Malloc(self.cap * sizeof(double))
        if self.data == NULL:
            raise MemoryError()

    def __dealloc__(self):
        if self.data != NULL:
            PyMem_Free(self.data)

    cdef inline int push(self, double v) except -1:
        if self.size == self.cap:
            self.cap *= 2
            self.data = <double *> PyMem_Realloc(self.data,
                                                 self.cap * sizeof(double))
            if self.data == NULL:
                raise MemoryError()
        self.data[self.size] = v
        self.size += 1
        return 0

    cdef cnp.ndarray array(self):
        cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(self.size)
        cdef Py_ssize_t i
        for i in range(self.size):
            out[i] = self.data[i]
        return out


cdef class Arena:
    """Molecule store (position, death time, birth time) plus a lazy
    max-position heap of fallback candidates."""
    cdef Buf pos, death, birth
    cdef long *heap
    cdef Py_ssize_t hsize, hcap

    def __cinit__(self):
        self.pos = Buf(1024)
        self.death = Buf(1024)
        self.birth = Buf(1024)
        self.hcap = 1024
        self.hsize = 0
        self.heap = <long *> PyMem_Malloc(self.hcap * sizeof(long))
        if self.heap == NULL:
            raise MemoryError()

    def __dealloc__(self):
        if self.heap != NULL:
            PyMem_Free(self.heap)

    cdef inline long add(self, double pos, double death, double birth) except -1:
        self.pos.push(pos)
        self.death.push(death)
        self.birth.push(birth)
        return self.pos.size - 1

    cdef inline int heap_push(self, long mid) except -1:
        cdef Py_ssize_t i, parent
        cdef double *key = self.pos.data
        if self.hsize == self.hcap:
            self.hcap *= 2
            self.heap = <long *> PyMem_Realloc(self.heap,
                                               self.hcap * sizeof(long))
            if self.heap == NULL:
                raise MemoryError()
        i = self.hsize
        self.heap[i] = mid
        self.hsize += 1
        while i > 0:
            parent = (i - 1) >> 1
            if key[self.heap[parent]] >= key[self.heap[i]]:
                break
            self.heap[parent], self.heap[i] = self.heap[i], self.heap[parent]
            i = parent
        return 0

    cdef inline long heap_pop(self) noexcept:
        # caller guarantees hsize > 0
        cdef double *key = self.pos.data
        cdef long top = self.heap[0]
        cdef Py_ssize_t i = 0, child
        self.hsize -= 1
        self.heap[0] = self.heap[self.hsize]
        while True:
            child = 2 * i + 1
            if child >= self.hsize:
                break
            if (child + 1 < self.hsize
                    and key[self.heap[child + 1]] > key[self.heap[child]]):
                child += 1
            if key[self.heap[i]] >= key[self.heap[child]]:
                break
            self.heap[i], self.heap[child] = self.heap[child], self.heap[i]
            i = child
        return top

    cdef long pop_fallback(self, double now, double min_birth):
        """Best alive fallback candidate, discarding dead or (for the thinned
        model) permanently ineligible entries; -1 when none remain."""
        cdef long mid
        while self.hsize > 0:
            mid = self.heap_pop()
            if self.death.data[mid] <= now:
                continue
            if self.birth.data[mid] < min_birth:
                continue
            return mid
        return -1


# ---------------------------------------------------------------------------
# killed reflected Brownian motion

def killed_rbm(object bit_generator, double gamma, double delta, double start,
               double dt, Py_ssize_t n, bint keep_path):
    """Sample n kill (time, pre-kill position) pairs; optionally the path of
    the first replicate."""
    cdef bitgen_t *rng = get_bitgen(bit_generator)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] kt = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] kp = np.empty(n)
    cdef double sdt = sqrt(dt)
    cdef double x, xn, hp, hn, acc, thresh, t
    cdef Py_ssize_t i
    cdef Buf pt = None, px = None
    if keep_path:
        if n != 1:
            raise ValueError("keep_path requires n == 1")
        pt = Buf(4096)
        px = Buf(4096)
    for i in range(n):
        x = start
        hp = gamma * x + delta
        acc = 0.0
        thresh = next_exp(rng)
        t = 0.0
        if keep_path:
            pt.push(t)
            px.push(x)
        while True:
            xn = fabs(x + sdt * next_normal(rng))
            hn = gamma * xn + delta
            acc += 0.5 * (hp + hn) * dt
            t += dt
            if acc >= thresh:
                kt[i] = t
                kp[i] = x
                break
            x = xn
            hp = hn
            if keep_path:
                pt.push(t)
                px.push(x)
        if keep_path:
            pt.push(t)
            px.push(xn)
    if keep_path:
        return kt, kp, pt.array(), px.array()
    return kt, kp


# ---------------------------------------------------------------------------
# Model II, boundary-jump construction

def model2_run(object bit_generator, double gamma, double delta, double x0,
               double dt, double horizon, Py_ssize_t until_jumps,
               Py_ssize_t record_stride):
    """Reflected walk with integrated-hazard boundary jumps.

    Stops at ``horizon`` or, when ``until_jumps`` > 0, after that many jumps.
    """
    cdef bitgen_t *rng = get_bitgen(bit_generator)
    cdef double sdt = sqrt(dt)
    cdef double R = 0.0, gap = x0, t = 0.0, t_jump = 0.0
    cdef double hp = gamma * gap + delta
    cdef double acc = 0.0, thresh = next_exp(rng)
    cdef double hn, w, p_up
    cdef Py_ssize_t njumps = 0, step = 0
    cdef bint by_time = until_jumps <= 0
    cdef Buf jt = Buf(4096), jY = Buf(4096), jW = Buf(4096), jeta = Buf(4096)
    cdef Buf pt = None, pX = None, pR = None
    if record_stride > 0:
        pt = Buf(4096)
        pX = Buf(4096)
        pR = Buf(4096)
        pt.push(0.0)
        pX.push(R + gap)
        pR.push(R)
    while True:
        if by_time:
            if t >= horizon - 0.5 * dt:
                break
        elif njumps >= until_jumps:
            break
        gap = fabs(gap + sdt * next_normal(rng))
        hn = gamma * gap + delta
        acc += 0.5 * (hp + hn) * dt
        hp = hn
        t += dt
        step += 1
        if acc >= thresh:
            p_up = 1.0 if delta == 0.0 else gamma * gap / (gamma * gap + delta)
            if next_u(rng) < p_up:
                w = next_u(rng) * gap
            else:
                w = -next_exp(rng) * delta / gamma
            R += w
            gap -= w
            jt.push(t)
            jY.push(gap)
            jW.push(w)
            jeta.push(t - t_jump)
            t_jump = t
            njumps += 1
            acc = 0.0
            thresh = next_exp(rng)
            hp = gamma * gap + delta
        if record_stride > 0 and step % record_stride == 0:
            pt.push(t)
            pX.push(R + gap)
            pR.push(R)
    if record_stride > 0:
        return (R + gap, R, t, jt.array(), jY.array(), jW.array(),
                jeta.array(), pt.array(), pX.array(), pR.array())
    return (R + gap, R, t, jt.array(), jY.array(), jW.array(), jeta.array(),
            None, None, None)


# ---------------------------------------------------------------------------
# Model II, single-Brownian active-point construction

def model2_active_run(object bit_generator, double gamma, double delta,
                      double x0, double dt, double horizon,
                      Py_ssize_t until_jumps, Py_ssize_t record_stride):
    """Same law as model2_run, driven by one unreflected Brownian motion and
    a jumping active point; also reports the largest X discontinuity across
    jumps."""
    cdef bitgen_t *rng = get_bitgen(bit_generator)
    cdef double sdt = sqrt(dt)
    cdef double S = x0, R = 0.0, b = 0.0, t = 0.0, t_jump = 0.0
    cdef double gap = fabs(b - S)
    cdef double hp = gamma * gap + delta
    cdef double acc = 0.0, thresh = next_exp(rng)
    cdef double hn, u, e, x_pre, x_post, R_old, disc, max_disc = 0.0
    cdef Py_ssize_t njumps = 0, step = 0
    cdef bint by_time = until_jumps <= 0
    cdef Buf jt = Buf(4096), jY = Buf(4096), jW = Buf(4096), jeta = Buf(4096)
    cdef Buf pt = None, pX = None, pR = None
    if record_stride > 0:
        pt = Buf(4096)
        pX = Buf(4096)
        pR = Buf(4096)
        pt.push(0.0)
        pX.push(R + gap)
        pR.push(R)
    while True:
        if by_time:
            if t >= horizon - 0.5 * dt:
                break
        elif njumps >= until_jumps:
            break
        b += sdt * next_normal(rng)
        gap = fabs(b - S)
        hn = gamma * gap + delta
        acc += 0.5 * (hp + hn) * dt
        hp = hn
        t += dt
        step += 1
        if acc >= thresh:
            x_pre = R + gap
            R_old = R
            if delta == 0.0 or next_u(rng) < gamma * gap / (gamma * gap + delta):
                u = next_u(rng)
                S = S + u * (b - S)
                R += u * gap
            else:
                e = next_exp(rng) * delta / gamma
                if S >= b:
                    S += e
                else:
                    S -= e
                R -= e
            gap = fabs(b - S)
            x_post = R + gap
            disc = fabs(x_post - x_pre)
            if disc > max_disc:
                max_disc = disc
            jt.push(t)
            jY.push(gap)
            jW.push(R - R_old)
            jeta.push(t - t_jump)
            t_jump = t
            njumps += 1
            acc = 0.0
            thresh = next_exp(rng)
            hp = gamma * gap + delta
        if record_stride > 0 and step % record_stride == 0:
            pt.push(t)
            pX.push(R + gap)
            pR.push(R)
    if record_stride > 0:
        return (R + gap, R, t, jt.array(), jY.array(), jW.array(),
                jeta.array(), max_disc, pt.array(), pX.array(), pR.array())
    return (R + gap, R, t, jt.array(), jY.array(), jW.array(), jeta.array(),
            max_disc, None, None, None)

# ---------------------------------------------------------------------------
# coupled pair of Model II ratchets (shared Brownian motion, maximally
# coupled jumps)

def coupled_pair_run(object bit_generator, double gamma, double delta,
                     double x1, double x2, double dt, double horizon,
                     Py_ssize_t record_stride):
    """Two active-point ratchets on one Brownian motion.

    Boundary events are decomposed into a shared component (rate gamma times
    the overlap of the two landing intervals, plus the common down rate
    delta) and per-ratchet residual components; a shared up event assigns the
    same sampled point to both active points, after which the states evolve
    identically.  Returns the first merge time (-1.0 when the horizon is
    exhausted first), the terminal positions, the post-merge jump count and
    the post-merge active-point spread (0 when merged).
    """
    cdef bitgen_t *rng = get_bitgen(bit_generator)
    cdef double sdt = sqrt(dt)
    cdef double S1 = x1, S2 = x2, R1 = 0.0, R2 = 0.0, b = 0.0, t = 0.0
    cdef double L1, L2, ov, c_up, c_r1, c_r2, lam, lamp
    cdef double acc = 0.0, thresh = next_exp(rng)
    cdef double coupling_time = -1.0
    cdef double lo, hi, w, e, v, spread, max_spread_after = 0.0
    cdef Py_ssize_t jumps_after = 0, step = 0
    cdef bint same_side
    cdef Buf pt = None, pX1 = None, pR1 = None, pX2 = None, pR2 = None
    if x1 == x2:
        coupling_time = 0.0
    if record_stride > 0:
        pt = Buf(4096); pX1 = Buf(4096); pR1 = Buf(4096)
        pX2 = Buf(4096); pR2 = Buf(4096)
        pt.push(0.0)
        pX1.push(R1 + fabs(b - S1)); pR1.push(R1)
        pX2.push(R2 + fabs(b - S2)); pR2.push(R2)
    L1 = fabs(b - S1); L2 = fabs(b - S2)
    same_side = (S1 - b) * (S2 - b) >= 0.0
    ov = min(L1, L2) if same_side else 0.0
    lamp = delta + gamma * (ov + (L1 - ov) + (L2 - ov))
    while t < horizon - 0.5 * dt:
        b += sdt * next_normal(rng)
        t += dt
        step += 1
        L1 = fabs(b - S1); L2 = fabs(b - S2)
        same_side = (S1 - b) * (S2 - b) >= 0.0
        ov = min(L1, L2) if same_side else 0.0
        c_up = gamma * ov
        c_r1 = gamma * (L1 - ov)
        c_r2 = gamma * (L2 - ov)
        lam = delta + c_up + c_r1 + c_r2
        acc += 0.5 * (lamp + lam) * dt
        lamp = lam
        if acc >= thresh:
            v = next_u(rng) * lam
            if v < c_up:
                # shared up jump: both land on the same point of the overlap
                if S1 <= b:
                    lo = max(S1, S2); hi = b
                else:
                    lo = b; hi = min(S1, S2)
                w = lo + next_u(rng) * (hi - lo)
                R1 += fabs(w - S1); S1 = w
                R2 += fabs(w - S2); S2 = w
                if coupling_time < 0.0:
                    coupling_time = t
            elif v < c_up + c_r1:
                # ratchet 1 alone, landing on its non-overlap segment
                if same_side:
                    if S1 <= b:
                        lo = S1; hi = max(S1, S2)
                    else:
                        lo = min(S1, S2); hi = S1
                else:
                    lo = min(S1, b); hi = max(S1, b)
                w = lo + next_u(rng) * (hi - lo)
                R1 += fabs(w - S1); S1 = w
            elif v < c_up + c_r1 + c_r2:
                if same_side:
                    if S2 <= b:
                        lo = S2; hi = max(S1, S2)
                    else:
                        lo = min(S1, S2); hi = S2
                else:
                    lo = min(S2, b); hi = max(S2, b)
                w = lo + next_u(rng) * (hi - lo)
                R2 += fabs(w - S2); S2 = w
            else:
                # shared down jump: same magnitude, each away from b
                e = next_exp(rng) * delta / gamma
                S1 += e if S1 >= b else -e
                S2 += e if S2 >= b else -e
                R1 -= e
                R2 -= e
            if coupling_time >= 0.0:
                jumps_after += 1
                spread = fabs(S1 - S2)
                if spread > max_spread_after:
                    max_spread_after = spread
            acc = 0.0
            thresh = next_exp(rng)
            L1 = fabs(b - S1); L2 = fabs(b - S2)
            same_side = (S1 - b) * (S2 - b) >= 0.0
            ov = min(L1, L2) if same_side else 0.0
            lamp = delta + gamma * (ov + (L1 - ov) + (L2 - ov))
        if record_stride > 0 and step % record_stride == 0:
            pt.push(t)
            pX1.push(R1 + fabs(b - S1)); pR1.push(R1)
            pX2.push(R2 + fabs(b - S2)); pR2.push(R2)
    if record_stride > 0:
        return (coupling_time, R1 + fabs(b - S1), R2 + fabs(b - S2),
                jumps_after, max_spread_after,
                pt.array(), pX1.array(), pR1.array(), pX2.array(), pR2.array())
    return (coupling_time, R1 + fabs(b - S1), R2 + fabs(b - S2),
            jumps_after, max_spread_after, None, None, None, None, None)


# ---------------------------------------------------------------------------
# Model I (full and thinned)

def model1_run(object bit_generator, double gamma, double delta, double x0,
               double dt, double horizon, bint window_mode,
               double window_factor, bint thinned, Py_ssize_t record_stride,
               double hit_tol):
    """Grid simulation of the molecule-set ratchet.

    Per step: Brownian move with reflection at the current boundary, then
    dissociations (only the boundary molecule's death can move the
    boundary), then Poisson bindings on [lower_edge, X].  ``window_mode``
    selects the equilibrium-window truncation; otherwise the fallback floor
    sits at 0.  ``thinned`` restricts dissociation fallbacks to molecules
    bound since the last renewal (first boundary hit after a boundary
    change) and reports the renewal sequence.
    """
    cdef bitgen_t *rng = get_bitgen(bit_generator)
    cdef Arena arena = Arena()
    cdef double sdt = sqrt(dt)
    cdef double win_off = window_factor * delta / gamma if window_mode else 0.0
    cdef double X = x0, R = 0.0, t = 0.0, sigma_star = -INFINITY
    cdef long active
    cdef bint armed = False
    cdef double pre, lower, L, lam, r, dth, R_old
    cdef long k, j, mid
    cdef Py_ssize_t step = 0, n_steps = <Py_ssize_t> (horizon / dt + 0.5)
    cdef long n_bind = 0, n_dissoc = 0, n_synth = 0
    cdef Buf ev_t = Buf(1024), ev_old = Buf(1024), ev_new = Buf(1024)
    cdef Buf ev_cause = Buf(1024)
    cdef Buf ren_t = None, ren_X = None
    cdef Buf pt = None, pX = None, pR = None
    # delta == 0: the boundary never falls, so molecules at or below the
    # boundary can never become the boundary again; skip materialising them
    cdef bint skip_below = delta == 0.0

    active = arena.add(0.0, t + (next_exp(rng) / delta if delta > 0 else INFINITY), 0.0)
    if thinned:
        ren_t = Buf(1024)
        ren_X = Buf(1024)
        if x0 <= hit_tol:
            sigma_star = 0.0
            ren_t.push(0.0)
            ren_X.push(X)
            armed = False
        else:
            armed = True
    if record_stride > 0:
        pt = Buf(4096); pX = Buf(4096); pR = Buf(4096)
        pt.push(0.0); pX.push(X); pR.push(R)

    for step in range(1, n_steps + 1):
        # 1. Brownian move, reflected at the current boundary
        pre = (X - R) + sdt * next_normal(rng)
        X = R + fabs(pre)
        t = step * dt
        if thinned and armed and pre <= hit_tol:
            sigma_star = t
            ren_t.push(t)
            ren_X.push(X)
            armed = False
        # 2. dissociation of the boundary molecule (other deaths are lazy)
        while active >= 0 and arena.death.data[active] <= t:
            R_old = R
            mid = arena.pop_fallback(t, sigma_star if thinned else -INFINITY)
            if mid >= 0:
                R = arena.pos.data[mid]
                active = mid
            elif not window_mode:
                R = 0.0
                active = -1
            else:
                if delta == 0.0:
                    raise RuntimeError("fallback draw impossible at delta=0")
                R = (R_old - win_off) - next_exp(rng) * delta / gamma
                active = arena.add(R, t + next_exp(rng) / delta, t)
                n_synth += 1
            n_dissoc += 1
            ev_t.push(t); ev_old.push(R_old); ev_new.push(R)
            ev_cause.push(-1.0)
            if thinned:
                armed = True
        # 3. new bindings on [lower, X]
        lower = R if skip_below else (R - win_off if window_mode else 0.0)
        L = X - lower
        if L > 0.0:
            lam = gamma * L * dt
            k = next_poisson(rng, lam)
            for j in range(k):
                r = lower + next_u(rng) * L
                dth = t + (next_exp(rng) / delta if delta > 0 else INFINITY)
                if r > R:
                    if active >= 0:
                        arena.heap_push(active)
                    active = arena.add(r, dth, t)
                    ev_t.push(t); ev_old.push(R); ev_new.push(r)
                    ev_cause.push(1.0)
                    R = r
                    n_bind += 1
                    if thinned:
                        armed = True
                else:
                    arena.add(r, dth, t)
                    arena.heap_push(arena.pos.size - 1)
                    n_bind += 1
        if record_stride > 0 and step % record_stride == 0:
            pt.push(t); pX.push(X); pR.push(R)

    return (X, R, t,
            ev_t.array(), ev_old.array(), ev_new.array(), ev_cause.array(),
            ren_t.array() if thinned else None,
            ren_X.array() if thinned else None,
            n_bind, n_dissoc, n_synth,
            pt.array() if record_stride > 0 else None,
            pX.array() if record_stride > 0 else None,
            pR.array() if record_stride > 0 else None)


# ---------------------------------------------------------------------------
# shared-noise (full, thinned) Model I pair for pathwise-domination checks

cdef double refl_inv_cdf(double g, double s, double u) noexcept nogil:
    """Quantile of |g + s N| (one-step reflected transition).

    Used by the paired runner: evaluating both processes' transitions at a
    shared uniform is a monotone coupling (the map is nondecreasing in both
    the start point and the boundary), which the raw-increment mirror update
    is not.
    """
    cdef double ylo = 0.0
    cdef double yhi = g + 9.0 * s
    cdef double y = fabs(g + s * ppnd16(u))
    cdef double f, fp, step
    cdef int it
    if y <= ylo or y >= yhi:
        y = 0.5 * (ylo + yhi)
    for it in range(100):
        f = 0.5 * (erf((y - g) / (s * SQRT2)) + erf((y + g) / (s * SQRT2))) - u
        if f > 0.0:
            yhi = y
        else:
            ylo = y
        fp = (exp(-0.5 * ((y - g) / s) ** 2)
              + exp(-0.5 * ((y + g) / s) ** 2)) / (s * 2.5066282746310002)
        if fp > 0.0:
            step = f / fp
            y -= step
            if fabs(step) < 1e-15 * (s + y):
                break
        if y <= ylo or y >= yhi:
            y = 0.5 * (ylo + yhi)
        if yhi - ylo < 1e-17 * (s + yhi):
            break
    return y


def model1_pair_run(object bit_generator, double gamma, double delta,
                    double x0, double dt, double horizon,
                    Py_ssize_t record_stride, double hit_tol):
    """Full and thinned Model I on identical noise (floor truncation).

    Both consume the same Poisson points and the same per-step reflection
    uniforms; the thinned process accepts the subset of points below its own
    path.  Returns the largest values of (X_thinned - X_full) and
    (R_thinned - R_full) over the grid (domination holds when these are
    <= ~1e-9 and <= 0).
    """
    cdef bitgen_t *rng = get_bitgen(bit_generator)
    cdef Arena ar_f = Arena()   # full
    cdef Arena ar_h = Arena()   # thinned
    cdef double sdt = sqrt(dt)
    cdef double Xf = x0, Rf = 0.0, Xh = x0, Rh = 0.0
    cdef double t = 0.0, sigma_star = -INFINITY
    cdef long act_f, act_h
    cdef bint armed
    cdef double u, gf, gh, lam, r, dth, R_old, pcross, z0
    cdef long k, j, mid
    cdef Py_ssize_t step, n_steps = <Py_ssize_t> (horizon / dt + 0.5)
    cdef long nev_f = 0, nev_h = 0
    cdef double max_dX = -INFINITY, max_dR = -INFINITY
    cdef Buf ren_t = Buf(1024), ren_X = Buf(1024)
    cdef Buf pt = None, pXf = None, pRf = None, pXh = None, pRh = None
    if record_stride > 0:
        pt = Buf(4096); pXf = Buf(4096); pRf = Buf(4096)
        pXh = Buf(4096); pRh = Buf(4096)
        pt.push(0.0); pXf.push(Xf); pRf.push(Rf); pXh.push(Xh); pRh.push(Rh)

    z0 = next_exp(rng) / delta if delta > 0 else INFINITY
    act_f = ar_f.add(0.0, z0, 0.0)
    act_h = ar_h.add(0.0, z0, 0.0)
    if x0 <= hit_tol:
        sigma_star = 0.0
        ren_t.push(0.0); ren_X.push(Xh)
        armed = False
    else:
        armed = True

    for step in range(1, n_steps + 1):
        t = step * dt
        # 1. shared-uniform reflected transitions of both gaps
        u = next_u(rng)
        gf = refl_inv_cdf(Xf - Rf, sdt, u)
        gh = refl_inv_cdf(Xh - Rh, sdt, u)
        # renewal detection for the thinned process: crossing probability of
        # the underlying Brownian path given the two endpoint gaps
        if armed:
            if gh <= hit_tol:
                pcross = 1.0
            elif 2.0 * (Xh - Rh) * gh / dt < 40.0:
                pcross = 1.0 / (1.0 + exp(2.0 * (Xh - Rh) * gh / dt))
            else:
                pcross = 0.0
            if pcross > 0.0 and next_u(rng) < pcross:
                sigma_star = t
                armed = False
                ren_t.push(t); ren_X.push(Rh + gh)
        Xf = Rf + gf
        Xh = Rh + gh
        # 2. deaths (molecules are shared; each side tracks its own active)
        while act_f >= 0 and ar_f.death.data[act_f] <= t:
            R_old = Rf
            mid = ar_f.pop_fallback(t, -INFINITY)
            if mid >= 0:
                Rf = ar_f.pos.data[mid]
                act_f = mid
            else:
                Rf = 0.0
                act_f = -1
            nev_f += 1
        while act_h >= 0 and ar_h.death.data[act_h] <= t:
            R_old = Rh
            mid = ar_h.pop_fallback(t, sigma_star)
            if mid >= 0:
                Rh = ar_h.pos.data[mid]
                act_h = mid
            else:
                Rh = 0.0
                act_h = -1
            nev_h += 1
            armed = True
        if Xf < Rf:
            Xf = Rf  # cannot happen; guards float dust
        if Xh < Rh:
            Xh = Rh
        # 3. shared bindings on the union window [0, Xf] (Xf >= Xh)
        lam = gamma * Xf * dt
        k = next_poisson(rng, lam)
        for j in range(k):
            r = next_u(rng) * Xf
            dth = t + (next_exp(rng) / delta if delta > 0 else INFINITY)
            # full model accepts every point
            if r > Rf:
                if act_f >= 0:
                    ar_f.heap_push(act_f)
                act_f = ar_f.add(r, dth, t)
                Rf = r
                nev_f += 1
            else:
                ar_f.add(r, dth, t)
                ar_f.heap_push(ar_f.pos.size - 1)
            # thinned model only sees points below its own path
            if r <= Xh:
                if r > Rh:
                    if act_h >= 0:
                        ar_h.heap_push(act_h)
                    act_h = ar_h.add(r, dth, t)
                    Rh = r
                    nev_h += 1
                    armed = True
                else:
                    ar_h.add(r, dth, t)
                    ar_h.heap_push(ar_h.pos.size - 1)
        if Xh - Xf > max_dX:
            max_dX = Xh - Xf
        if Rh - Rf > max_dR:
            max_dR = Rh - Rf
        if record_stride > 0 and step % record_stride == 0:
            pt.push(t)
            pXf.push(Xf); pRf.push(Rf)
            pXh.push(Xh); pRh.push(Rh)

    return (max_dX, max_dR, Xf, Xh, Rf, Rh, t, nev_f, nev_h,
            ren_t.array(), ren_X.array(),
            pt.array() if record_stride > 0 else None,
            pXf.array() if record_stride > 0 else None,
            pRf.array() if record_stride > 0 else None,
            pXh.array() if record_stride > 0 else None,
            pRh.array() if record_stride > 0 else None)
