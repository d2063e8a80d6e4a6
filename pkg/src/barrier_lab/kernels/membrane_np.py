"""Vectorized numpy twin of :mod:`membrane_nb`.

Same per-step algorithm, applied to all live paths at once.  Draw order per
path is identical to the compiled kernel, so with the same seed both
backends produce the same paths up to last-bit differences between numpy's
and libm's transcendental functions.
"""

import numpy as np

from ..rng import (NormalCacheVec, next_exponential_vec, next_uniform_vec,
                   stream_states_vec)
from .membrane_nb import BROWNIAN, ELASTIC, HIT_A, HIT_B, KILLED, TIMEOUT, _CUT


def _exp_draw(ev, idx, rates):
    s = ev[idx]
    out = next_exponential_vec(s, rates)
    ev[idx] = s
    return out


def snob_batch(kind, x0, side0, bp, bm, a, b, walls, wbl, wbr, h, max_steps,
               seed, path_offset, n_paths, record=False):
    """Run ``n_paths`` paths; returns a dict of per-path arrays.

    With ``record`` the dict also holds ``rec_t, rec_x, rec_l, rec_s`` of shape
    ``(n_paths, max_steps + 1)`` and ``n_rec``.
    """
    n = n_paths
    paths = np.arange(path_offset, path_offset + n, dtype=np.uint64)
    with np.errstate(over="ignore"):
        st = stream_states_vec(seed, paths, 0)
        ev = stream_states_vec(seed, paths, 1)
    sq = np.sqrt(h)
    cut = _CUT * h
    allidx = np.arange(n)
    olderr = np.seterr(over="ignore", under="ignore")
    try:
        thr_l = np.full(n, np.inf)
        thr_r = np.full(n, np.inf)
        if walls:
            thr_l = _exp_draw(ev, allidx, wbl)
            thr_r = _exp_draw(ev, allidx, wbr)
            a, b = -1.0, 1.0
        side = np.full(n, int(side0), dtype=np.int64)
        x = np.full(n, float(x0))
        r = np.full(n, abs(float(x0)))
        thr = _exp_draw(ev, allidx, np.where(side > 0, bp, bm))
        cur = np.zeros(n)
        lt = np.zeros(n)
        wl = np.zeros(n)
        wr = np.zeros(n)
        nsw = np.zeros(n, dtype=np.int64)
        t = np.zeros(n)
        code = np.zeros(n, dtype=np.int64)
        t_exit = np.full(n, np.nan)
        cache = NormalCacheVec(n)
        if record:
            rec_t = np.zeros((n, max_steps + 1))
            rec_x = np.zeros((n, max_steps + 1))
            rec_l = np.zeros((n, max_steps + 1))
            rec_s = np.zeros((n, max_steps + 1), dtype=np.int8)
            rec_x[:, 0] = x0
            rec_s[:, 0] = side0
            n_rec = np.ones(n, dtype=np.int64)
        live = allidx
        for step in range(max_steps):
            if live.size == 0:
                break
            z = cache.draw(st, live) * sq
            s = st[live]
            um = next_uniform_vec(s)
            uM = next_uniform_vec(s)
            st[live] = s
            vm = 1.0 - um
            vM = 1.0 - uM
            t0 = t[live]
            t1 = t0 + h
            c = np.zeros(live.size, dtype=np.int64)
            te = np.full(live.size, np.nan)
            if kind == BROWNIAN:
                xo = x[live]
                xn = xo + z
                up = xn >= b
                dn = (xn <= a) & ~up
                gb = (b - xo) * (b - xn)
                ga = (xo - a) * (xn - a)
                bu = ~up & ~dn & (gb < cut)
                bu[bu] = vM[bu] < np.exp(-2.0 * gb[bu] / h)
                bd = ~up & ~dn & ~bu & (ga < cut)
                bd[bd] = vm[bd] < np.exp(-2.0 * ga[bd] / h)
                c[up | bu] = HIT_B
                c[dn | bd] = HIT_A
                with np.errstate(divide="ignore", invalid="ignore"):
                    te = np.where(up, t0 + h * (b - xo) / (xn - xo),
                                  np.where(dn, t0 + h * (xo - a) / (xo - xn), t1))
                te = np.where(c != 0, te, np.nan)
                xn = np.where(c == HIT_B, b, np.where(c == HIT_A, a, xn))
                x[live] = xn
                newx = xn
                newl = np.zeros(live.size)
                news = np.where(xn >= 0, 1, -1)
            else:
                ro = r[live]
                sd = side[live]
                y = ro + z
                dl = np.zeros(live.size)
                ref = (y <= 0.0) | (ro * y < cut)
                chk = ref & (y > 0.0)
                ref[chk] = vm[chk] < np.exp(-2.0 * ro[chk] * y[chk] / h)
                if ref.any():
                    yr, rr = y[ref], ro[ref]
                    m = 0.5 * (rr + yr - np.sqrt((yr - rr) ** 2 - 2.0 * h * np.log(vm[ref])))
                    d = np.where(m < 0.0, -m, 0.0)
                    dl[ref] = d
                    y[ref] = yr + d
                if walls:
                    g = (1.0 - ro) * (1.0 - y)
                    hit = (y >= 1.0) | (g < cut)
                    chk = hit & (y < 1.0)
                    hit[chk] = vM[chk] < np.exp(-2.0 * g[chk] / h)
                    if hit.any():
                        yh, rh = y[hit], ro[hit]
                        mx = 0.5 * (rh + yh + np.sqrt((yh - rh) ** 2 - 2.0 * h * np.log(vM[hit])))
                        dw = np.where(mx > 1.0, mx - 1.0, 0.0)
                        y[hit] = yh - dw
                        li = live[hit]
                        plus = sd[hit] > 0
                        wr[li[plus]] += dw[plus]
                        wl[li[~plus]] += dw[~plus]
                        kr = plus & (wr[li] >= thr_r[li]) & (dw > 0)
                        kl = ~plus & (wl[li] >= thr_l[li]) & (dw > 0)
                        wr[li[kr]] = thr_r[li[kr]]
                        wl[li[kl]] = thr_l[li[kl]]
                        ch = np.zeros(hit.sum(), dtype=np.int64)
                        ch[kr] = HIT_B
                        ch[kl] = HIT_A
                        c[hit] = ch
                    te = np.where(c != 0, t1, np.nan)
                else:
                    big = np.where(sd > 0, b, -a)
                    over = y >= big
                    g = (big - ro) * (big - y)
                    br = ~over & (g < cut)
                    br[br] = vM[br] < np.exp(-2.0 * g[br] / h)
                    ex = over | br
                    c[ex] = np.where(sd[ex] > 0, HIT_B, HIT_A)
                    with np.errstate(divide="ignore", invalid="ignore"):
                        te = np.where(over, t0 + h * (big - ro) / (y - ro), np.where(br, t1, np.nan))
                    y = np.where(ex, big, y)
                li = live
                exited = c != TIMEOUT
                lt[li[exited]] += dl[exited]
                rn = y.copy()
                touch = ~exited & (dl > 0.0)
                cu = cur[li]
                th = thr[li]
                sw = touch & (cu + dl >= th) if kind != BROWNIAN else np.zeros(touch.shape, bool)
                keep = touch & ~sw
                cur[li[keep]] = cu[keep] + dl[keep]
                lt[li[keep]] += dl[keep]
                if sw.any():
                    lw = li[sw]
                    lt[lw] += th[sw] - cu[sw]
                    rn[sw] = 0.0
                    if kind == ELASTIC:
                        c[sw] = KILLED
                        te[sw] = t1[sw]
                    else:
                        side[lw] = -side[lw]
                        cur[lw] = 0.0
                        nsw[lw] += 1
                        thr[lw] = _exp_draw(ev, lw, np.where(side[lw] > 0, bp, bm))
                r[li] = rn
                newx = side[li] * rn
                newl = lt[li]
                news = side[li]
            t[live] = t1
            done = c != TIMEOUT
            code[live[done]] = c[done]
            t_exit[live[done]] = te[done]
            if record:
                k = n_rec[live]
                rec_t[live, k] = np.where(done, te, t1)
                rec_x[live, k] = newx
                rec_l[live, k] = newl
                rec_s[live, k] = news
                n_rec[live] += 1
            live = live[~done]
    finally:
        np.seterr(**olderr)
    xf = x if kind == BROWNIAN else side * r
    out = dict(code=code, t_exit=t_exit, lt=lt, n_switch=nsw, wl=wl, wr=wr, x_final=xf)
    if record:
        out.update(rec_t=rec_t, rec_x=rec_x, rec_l=rec_l, rec_s=rec_s, n_rec=n_rec)
    return out
