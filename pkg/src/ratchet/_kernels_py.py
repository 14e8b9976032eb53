"""Pure-Python/numpy fallback for the compiled kernels.

Implements the same stepping semantics and the same result tuples as the
extension module, drawing from the same kind of Philox stream.  It is the
import-time fallback when the extension is unavailable (and the reference
backend for cross-checking); expect roughly an order of magnitude less
throughput.  Streams are deterministic per backend, not bit-identical
across backends.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

from .mathx import inv_norm_cdf

_CHUNK = 8192
_INV53 = 2.0**-53


def _u(gen, size=None):
    """Cell-centred uniforms in (0, 1)."""
    raw = gen.integers(0, 1 << 53, dtype=np.uint64, size=size)
    if size is None:
        return (float(raw) + 0.5) * _INV53
    return (raw.astype(np.float64) + 0.5) * _INV53


def _exp(gen, size=None):
    return -np.log1p(-_u(gen, size))


def _normals(gen, size):
    return inv_norm_cdf(_u(gen, size))


def _fold(w):
    """Reflect a free walk at 0 (flip the tail after each crossing).

    Produces a path equal in law to the per-step mirror recursion
    g <- |g + d|.
    """
    j = 0
    while True:
        neg = np.nonzero(w[j:] < 0.0)[0]
        if neg.size == 0:
            return w
        j += int(neg[0])
        w[j:] = -w[j:]


def killed_rbm(gen, gamma, delta, start, dt, n, keep_path):
    """Vectorised across replicates; path recording only for n == 1."""
    if keep_path and n != 1:
        raise ValueError("keep_path requires n == 1")
    sdt = math.sqrt(dt)
    kill_t = np.empty(n)
    kill_p = np.empty(n)
    if keep_path:
        x = start
        hp = gamma * x + delta
        acc, thresh, t = 0.0, float(_exp(gen)), 0.0
        ts, xs = [0.0], [start]
        while True:
            xn = abs(x + sdt * float(_normals(gen, 1)[0]))
            hn = gamma * xn + delta
            acc += 0.5 * (hp + hn) * dt
            t += dt
            if acc >= thresh:
                kill_t[0], kill_p[0] = t, x
                ts.append(t)
                xs.append(xn)
                return kill_t, kill_p, np.asarray(ts), np.asarray(xs)
            x, hp = xn, hn
            ts.append(t)
            xs.append(x)
    x = np.full(n, float(start))
    hp = gamma * x + delta
    acc = np.zeros(n)
    thresh = _exp(gen, n)
    alive = np.arange(n)
    t = 0.0
    while alive.size:
        t += dt
        d = _normals(gen, alive.size) * sdt
        xn = np.abs(x[alive] + d)
        hn = gamma * xn + delta
        acc[alive] += 0.5 * (hp[alive] + hn) * dt
        killed = acc[alive] >= thresh[alive]
        idx = alive[killed]
        kill_t[idx] = t
        kill_p[idx] = x[idx]  # pre-step position
        x[alive] = xn
        hp[alive] = hn
        alive = alive[~killed]
    return kill_t, kill_p


class _PathRec:
    def __init__(self, stride, t0_state):
        self.stride = stride
        self.t, self.X, self.R = [], [], []
        if stride > 0:
            self.t.append(t0_state[0])
            self.X.append(t0_state[1])
            self.R.append(t0_state[2])

    def push_block(self, step0, ts, Xs, Rs):
        # steps step0+1 .. step0+len(ts)
        if self.stride <= 0:
            return
        k = np.arange(1, len(ts) + 1) + step0
        sel = k % self.stride == 0
        self.t.extend(np.asarray(ts)[sel])
        self.X.extend(np.asarray(Xs)[sel])
        self.R.extend(np.asarray(Rs)[sel])

    def arrays(self):
        if self.stride <= 0:
            return None, None, None
        return (np.asarray(self.t), np.asarray(self.X), np.asarray(self.R))


def model2_run(gen, gamma, delta, x0, dt, horizon, until_jumps, record_stride):
    sdt = math.sqrt(dt)
    R, gap = 0.0, float(x0)
    hp = gamma * gap + delta
    acc, thresh = 0.0, float(_exp(gen))
    t_jump = 0.0
    jt, jY, jW, jeta = [], [], [], []
    by_time = until_jumps <= 0
    n_steps = int(round(horizon / dt)) if by_time else (1 << 62)
    rec = _PathRec(record_stride, (0.0, R + gap, R))
    step = 0
    while step < n_steps and (by_time or len(jt) < until_jumps):
        m = min(_CHUNK, n_steps - step)
        d = _normals(gen, m) * sdt
        used = 0
        while used < m:
            g = _fold(gap + np.cumsum(d[used:m]))
            h = gamma * g + delta
            hseq = np.concatenate(([hp], h))
            c = acc + np.cumsum(0.5 * (hseq[:-1] + hseq[1:]) * dt)
            hit = np.nonzero(c >= thresh)[0]
            if hit.size == 0:
                acc = float(c[-1])
                hp = float(h[-1])
                gap = float(g[-1])
                rec.push_block(step, (step + 1 + np.arange(m - used)) * dt,
                               R + g, np.full(g.size, R))
                step += m - used
                used = m
                continue
            i = int(hit[0])  # event at relative step i (gap g[i])
            gap = float(g[i])
            ev_step = step + i + 1
            t = ev_step * dt
            p_up = 1.0 if delta == 0.0 else gamma * gap / (gamma * gap + delta)
            if _u(gen) < p_up:
                w = _u(gen) * gap
            else:
                w = -float(_exp(gen)) * delta / gamma
            rec.push_block(step, (step + 1 + np.arange(i)) * dt,
                           R + g[:i], np.full(i, R))
            R += w
            gap -= w
            if record_stride > 0 and ev_step % record_stride == 0:
                rec.t.append(t)
                rec.X.append(R + gap)
                rec.R.append(R)
            jt.append(t)
            jY.append(gap)
            jW.append(w)
            jeta.append(t - t_jump)
            t_jump = t
            acc = 0.0
            thresh = float(_exp(gen))
            hp = gamma * gap + delta
            used += i + 1
            step = ev_step
            if not by_time and len(jt) >= until_jumps:
                break
    t = step * dt
    pt, pX, pR = rec.arrays()
    return (R + gap, R, t, np.asarray(jt), np.asarray(jY), np.asarray(jW),
            np.asarray(jeta), pt, pX, pR)


def model2_active_run(gen, gamma, delta, x0, dt, horizon, until_jumps,
                      record_stride):
    sdt = math.sqrt(dt)
    S, R, b = float(x0), 0.0, 0.0
    hp = gamma * abs(b - S) + delta
    acc, thresh = 0.0, float(_exp(gen))
    t_jump = 0.0
    max_disc = 0.0
    jt, jY, jW, jeta = [], [], [], []
    by_time = until_jumps <= 0
    n_steps = int(round(horizon / dt)) if by_time else (1 << 62)
    rec = _PathRec(record_stride, (0.0, R + abs(b - S), R))
    step = 0
    while step < n_steps and (by_time or len(jt) < until_jumps):
        m = min(_CHUNK, n_steps - step)
        d = _normals(gen, m) * sdt
        used = 0
        while used < m:
            bpath = b + np.cumsum(d[used:m])
            g = np.abs(bpath - S)
            h = gamma * g + delta
            hseq = np.concatenate(([hp], h))
            c = acc + np.cumsum(0.5 * (hseq[:-1] + hseq[1:]) * dt)
            hit = np.nonzero(c >= thresh)[0]
            if hit.size == 0:
                acc = float(c[-1])
                hp = float(h[-1])
                b = float(bpath[-1])
                rec.push_block(step, (step + 1 + np.arange(m - used)) * dt,
                               R + g, np.full(g.size, R))
                step += m - used
                used = m
                continue
            i = int(hit[0])
            b = float(bpath[i])
            gap = float(g[i])
            ev_step = step + i + 1
            t = ev_step * dt
            rec.push_block(step, (step + 1 + np.arange(i)) * dt,
                           R + g[:i], np.full(i, R))
            x_pre = R + gap
            R_old = R
            if delta == 0.0 or _u(gen) < gamma * gap / (gamma * gap + delta):
                uu = _u(gen)
                S = S + uu * (b - S)
                R += uu * gap
            else:
                e = float(_exp(gen)) * delta / gamma
                S = S + e if S >= b else S - e
                R -= e
            gap = abs(b - S)
            if record_stride > 0 and ev_step % record_stride == 0:
                rec.t.append(t)
                rec.X.append(R + gap)
                rec.R.append(R)
            max_disc = max(max_disc, abs(R + gap - x_pre))
            jt.append(t)
            jY.append(gap)
            jW.append(R - R_old)
            jeta.append(t - t_jump)
            t_jump = t
            acc = 0.0
            thresh = float(_exp(gen))
            hp = gamma * gap + delta
            used += i + 1
            step = ev_step
            if not by_time and len(jt) >= until_jumps:
                break
    t = step * dt
    pt, pX, pR = rec.arrays()
    return (R + abs(b - S), R, t, np.asarray(jt), np.asarray(jY),
            np.asarray(jW), np.asarray(jeta), max_disc, pt, pX, pR)


def coupled_pair_run(gen, gamma, delta, x1, x2, dt, horizon, record_stride):
    sdt = math.sqrt(dt)
    S1, S2, R1, R2, b = float(x1), float(x2), 0.0, 0.0, 0.0
    coupling_time = 0.0 if x1 == x2 else -1.0
    jumps_after = 0
    max_spread_after = 0.0
    acc, thresh = 0.0, float(_exp(gen))

    def lam_of(bv):
        L1 = np.abs(bv - S1)
        L2 = np.abs(bv - S2)
        same = (S1 - bv) * (S2 - bv) >= 0.0
        ov = np.where(same, np.minimum(L1, L2), 0.0)
        return L1, L2, ov, delta + gamma * (L1 + L2 - ov)

    _, _, _, lam0 = lam_of(np.array([b]))
    lamp = float(lam0[0])
    n_steps = int(round(horizon / dt))
    t1, t2 = [0.0, R1 + abs(b - S1), R1], [0.0, R2 + abs(b - S2), R2]
    rec1 = _PathRec(record_stride, tuple(t1))
    rec2 = _PathRec(record_stride, tuple(t2))
    step = 0
    while step < n_steps:
        m = min(_CHUNK, n_steps - step)
        d = _normals(gen, m) * sdt
        used = 0
        while used < m:
            bpath = b + np.cumsum(d[used:m])
            L1, L2, ov, lam = lam_of(bpath)
            lseq = np.concatenate(([lamp], lam))
            c = acc + np.cumsum(0.5 * (lseq[:-1] + lseq[1:]) * dt)
            hit = np.nonzero(c >= thresh)[0]
            upto = int(hit[0]) if hit.size else m - used
            seg = slice(0, upto)
            rec1.push_block(step, (step + 1 + np.arange(upto)) * dt,
                            R1 + np.abs(bpath[seg] - S1),
                            np.full(upto, R1))
            rec2.push_block(step, (step + 1 + np.arange(upto)) * dt,
                            R2 + np.abs(bpath[seg] - S2),
                            np.full(upto, R2))
            if hit.size == 0:
                acc = float(c[-1])
                lamp = float(lam[-1])
                b = float(bpath[-1])
                step += m - used
                used = m
                continue
            i = int(hit[0])
            b = float(bpath[i])
            ev_step = step + i + 1
            t = ev_step * dt
            l1, l2 = abs(b - S1), abs(b - S2)
            same = (S1 - b) * (S2 - b) >= 0.0
            o = min(l1, l2) if same else 0.0
            c_up, c_r1, c_r2 = gamma * o, gamma * (l1 - o), gamma * (l2 - o)
            lam_now = delta + c_up + c_r1 + c_r2
            v = _u(gen) * lam_now
            if v < c_up:
                lo, hi = (max(S1, S2), b) if S1 <= b else (b, min(S1, S2))
                w = lo + _u(gen) * (hi - lo)
                R1 += abs(w - S1)
                R2 += abs(w - S2)
                S1 = S2 = w
                if coupling_time < 0.0:
                    coupling_time = t
            elif v < c_up + c_r1:
                if same:
                    lo, hi = (S1, max(S1, S2)) if S1 <= b else (min(S1, S2), S1)
                else:
                    lo, hi = min(S1, b), max(S1, b)
                w = lo + _u(gen) * (hi - lo)
                R1 += abs(w - S1)
                S1 = w
            elif v < c_up + c_r1 + c_r2:
                if same:
                    lo, hi = (S2, max(S1, S2)) if S2 <= b else (min(S1, S2), S2)
                else:
                    lo, hi = min(S2, b), max(S2, b)
                w = lo + _u(gen) * (hi - lo)
                R2 += abs(w - S2)
                S2 = w
            else:
                e = float(_exp(gen)) * delta / gamma
                S1 += e if S1 >= b else -e
                S2 += e if S2 >= b else -e
                R1 -= e
                R2 -= e
            if coupling_time >= 0.0:
                jumps_after += 1
                max_spread_after = max(max_spread_after, abs(S1 - S2))
            if record_stride > 0 and ev_step % record_stride == 0:
                rec1.t.append(t)
                rec1.X.append(R1 + abs(b - S1))
                rec1.R.append(R1)
                rec2.t.append(t)
                rec2.X.append(R2 + abs(b - S2))
                rec2.R.append(R2)
            acc = 0.0
            thresh = float(_exp(gen))
            _, _, _, lam0 = lam_of(np.array([b]))
            lamp = float(lam0[0])
            used += i + 1
            step = ev_step
    pt1, pX1, pR1 = rec1.arrays()
    _, pX2, pR2 = rec2.arrays()
    return (coupling_time, R1 + abs(b - S1), R2 + abs(b - S2), jumps_after,
            max_spread_after, pt1, pX1, pR1, pX2, pR2)


class _Molecules:
    """Molecule arena with a lazy max-position heap of fallback candidates."""

    def __init__(self):
        self.pos, self.death, self.birth = [], [], []
        self.heap = []  # (-pos, id)

    def add(self, pos, death, birth):
        self.pos.append(pos)
        self.death.append(death)
        self.birth.append(birth)
        return len(self.pos) - 1

    def push(self, mid):
        heapq.heappush(self.heap, (-self.pos[mid], mid))

    def pop_fallback(self, now, min_birth):
        while self.heap:
            _, mid = heapq.heappop(self.heap)
            if self.death[mid] <= now or self.birth[mid] < min_birth:
                continue
            return mid
        return -1


def model1_run(gen, gamma, delta, x0, dt, horizon, window_mode, window_factor,
               thinned, record_stride, hit_tol):
    sdt = math.sqrt(dt)
    win_off = window_factor * delta / gamma if window_mode else 0.0
    mol = _Molecules()
    X, R, t = float(x0), 0.0, 0.0
    sigma_star = -math.inf
    armed = False
    n_bind = n_dissoc = n_synth = 0
    ev_t, ev_old, ev_new, ev_cause = [], [], [], []
    ren_t, ren_X = [], []
    skip_below = delta == 0.0

    active = mol.add(0.0, float(_exp(gen)) / delta if delta > 0 else math.inf,
                     0.0)
    if thinned:
        if x0 <= hit_tol:
            sigma_star = 0.0
            ren_t.append(0.0)
            ren_X.append(X)
        else:
            armed = True
    rec = _PathRec(record_stride, (0.0, X, R))
    n_steps = int(round(horizon / dt))
    normals = np.empty(0)
    ni = 0
    for step in range(1, n_steps + 1):
        if ni >= normals.size:
            normals = _normals(gen, _CHUNK)
            ni = 0
        pre = (X - R) + sdt * float(normals[ni])
        ni += 1
        X = R + abs(pre)
        t = step * dt
        if thinned and armed and pre <= hit_tol:
            sigma_star = t
            ren_t.append(t)
            ren_X.append(X)
            armed = False
        while active >= 0 and mol.death[active] <= t:
            R_old = R
            mid = mol.pop_fallback(t, sigma_star if thinned else -math.inf)
            if mid >= 0:
                R = mol.pos[mid]
                active = mid
            elif not window_mode:
                R, active = 0.0, -1
            else:
                if delta == 0.0:
                    raise RuntimeError("fallback draw impossible at delta=0")
                R = (R_old - win_off) - float(_exp(gen)) * delta / gamma
                active = mol.add(R, t + float(_exp(gen)) / delta, t)
                n_synth += 1
            n_dissoc += 1
            ev_t.append(t)
            ev_old.append(R_old)
            ev_new.append(R)
            ev_cause.append(-1)
            if thinned:
                armed = True
        lower = R if skip_below else (R - win_off if window_mode else 0.0)
        L = X - lower
        if L > 0.0:
            lam = gamma * L * dt
            u = _u(gen)
            k, p, c = 0, math.exp(-lam), math.exp(-lam)
            while u > c and k < 200:
                k += 1
                p *= lam / k
                c += p
            for _ in range(k):
                r = lower + _u(gen) * L
                dth = t + (float(_exp(gen)) / delta if delta > 0 else math.inf)
                if r > R:
                    if active >= 0:
                        mol.push(active)
                    active = mol.add(r, dth, t)
                    ev_t.append(t)
                    ev_old.append(R)
                    ev_new.append(r)
                    ev_cause.append(1)
                    R = r
                    n_bind += 1
                    if thinned:
                        armed = True
                else:
                    mol.push(mol.add(r, dth, t))
                    n_bind += 1
        if record_stride > 0 and step % record_stride == 0:
            rec.t.append(t)
            rec.X.append(X)
            rec.R.append(R)
    pt, pX, pR = rec.arrays()
    return (X, R, t, np.asarray(ev_t), np.asarray(ev_old), np.asarray(ev_new),
            np.asarray(ev_cause, dtype=np.int8),
            np.asarray(ren_t) if thinned else None,
            np.asarray(ren_X) if thinned else None,
            n_bind, n_dissoc, n_synth, pt, pX, pR)


def _refl_inv_cdf(g, s, u):
    """Quantile of |g + s N|; monotone in (g + boundary) jointly."""
    ylo, yhi = 0.0, g + 9.0 * s
    y = abs(g + s * float(inv_norm_cdf(u)))
    if y <= ylo or y >= yhi:
        y = 0.5 * (ylo + yhi)
    inv_sq2 = 1.0 / (s * math.sqrt(2.0))
    for _ in range(100):
        f = 0.5 * (math.erf((y - g) * inv_sq2)
                   + math.erf((y + g) * inv_sq2)) - u
        if f > 0.0:
            yhi = y
        else:
            ylo = y
        fp = (math.exp(-0.5 * ((y - g) / s) ** 2)
              + math.exp(-0.5 * ((y + g) / s) ** 2)) / (s * math.sqrt(2 * math.pi))
        if fp > 0.0:
            st = f / fp
            y -= st
            if abs(st) < 1e-15 * (s + y):
                break
        if y <= ylo or y >= yhi:
            y = 0.5 * (ylo + yhi)
        if yhi - ylo < 1e-17 * (s + yhi):
            break
    return y


def model1_pair_run(gen, gamma, delta, x0, dt, horizon, record_stride,
                    hit_tol):
    sdt = math.sqrt(dt)
    ar_f, ar_h = _Molecules(), _Molecules()
    Xf = Xh = float(x0)
    Rf = Rh = 0.0
    sigma_star = -math.inf
    ren_t, ren_X = [], []
    z0 = float(_exp(gen)) / delta if delta > 0 else math.inf
    act_f = ar_f.add(0.0, z0, 0.0)
    act_h = ar_h.add(0.0, z0, 0.0)
    if x0 <= hit_tol:
        sigma_star = 0.0
        ren_t.append(0.0)
        ren_X.append(Xh)
        armed = False
    else:
        armed = True
    nev_f = nev_h = 0
    max_dX = max_dR = -math.inf
    recf = _PathRec(record_stride, (0.0, Xf, Rf))
    rech = _PathRec(record_stride, (0.0, Xh, Rh))
    n_steps = int(round(horizon / dt))
    for step in range(1, n_steps + 1):
        t = step * dt
        u = _u(gen)
        gf = _refl_inv_cdf(Xf - Rf, sdt, u)
        gh = _refl_inv_cdf(Xh - Rh, sdt, u)
        if armed:
            arg = 2.0 * (Xh - Rh) * gh / dt
            if gh <= hit_tol:
                pcross = 1.0
            elif arg < 40.0:
                pcross = 1.0 / (1.0 + math.exp(arg))
            else:
                pcross = 0.0
            if pcross > 0.0 and _u(gen) < pcross:
                sigma_star = t
                armed = False
                ren_t.append(t)
                ren_X.append(Rh + gh)
        Xf, Xh = Rf + gf, Rh + gh
        while act_f >= 0 and ar_f.death[act_f] <= t:
            mid = ar_f.pop_fallback(t, -math.inf)
            Rf, act_f = (ar_f.pos[mid], mid) if mid >= 0 else (0.0, -1)
            nev_f += 1
        while act_h >= 0 and ar_h.death[act_h] <= t:
            mid = ar_h.pop_fallback(t, sigma_star)
            Rh, act_h = (ar_h.pos[mid], mid) if mid >= 0 else (0.0, -1)
            nev_h += 1
            armed = True
        lam = gamma * Xf * dt
        u = _u(gen)
        k, p, c = 0, math.exp(-lam), math.exp(-lam)
        while u > c and k < 200:
            k += 1
            p *= lam / k
            c += p
        for _ in range(k):
            r = _u(gen) * Xf
            dth = t + (float(_exp(gen)) / delta if delta > 0 else math.inf)
            if r > Rf:
                if act_f >= 0:
                    ar_f.push(act_f)
                act_f = ar_f.add(r, dth, t)
                Rf = r
                nev_f += 1
            else:
                ar_f.push(ar_f.add(r, dth, t))
            if r <= Xh:
                if r > Rh:
                    if act_h >= 0:
                        ar_h.push(act_h)
                    act_h = ar_h.add(r, dth, t)
                    Rh = r
                    nev_h += 1
                    armed = True
                else:
                    ar_h.push(ar_h.add(r, dth, t))
        max_dX = max(max_dX, Xh - Xf)
        max_dR = max(max_dR, Rh - Rf)
        if record_stride > 0 and step % record_stride == 0:
            recf.t.append(t), recf.X.append(Xf), recf.R.append(Rf)
            rech.t.append(t), rech.X.append(Xh), rech.R.append(Rh)
    ptf, pXf, pRf = recf.arrays()
    _, pXh, pRh = rech.arrays()
    return (max_dX, max_dR, Xf, Xh, Rf, Rh, n_steps * dt, nev_f, nev_h,
            np.asarray(ren_t), np.asarray(ren_X), ptf, pXf, pRf, pXh, pRh)
