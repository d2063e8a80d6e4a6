"""Compiled path kernels for reflected and snapping-out Brownian motion.

State is ``(side, r)`` with ``r >= 0`` the distance to the membrane, so the
signed position is ``side * r``.  One step of length h:

1. ``y = r + sqrt(h) * xi``.
2. Skorokhod reflection at 0 using the exact Brownian-bridge minimum: with
   ``U`` uniform, ``M = (r + y - sqrt((y - r)**2 - 2 h log U)) / 2`` has the law
   of the bridge minimum, and ``M < 0`` iff ``U < exp(-2 r y / h)``.  The
   regulator increment is ``dl = max(0, -M)`` and ``r' = y + dl``.
3. Walls (optional) are the same construction with the bridge maximum.
   Otherwise the far level is crossed iff the bridge maximum exceeds it.
4. The membrane clock: when the side's local time reaches its Exp(beta)
   threshold the path restarts at 0 on the other side.

Each step draws one normal (Box-Muller, spare cached) and two uniforms from
the step stream; thresholds come from the event stream.  Draw counts are
therefore fixed per step, which keeps the numpy twin bit-compatible.
"""

import math

import numpy as np

from .._backend import njit, prange
from ..rng import next_exponential, next_uniform, stream_state

BROWNIAN = 0
SNOB = 1
ELASTIC = 2

TIMEOUT = 0
HIT_A = -1
HIT_B = 1
KILLED = 2

_CUT = 25.0  # exp(-2 * 25) ~ 2e-22: bridge events beyond this are skipped


@njit
def snob_path(kind, x0, side0, bp, bm, a, b, walls, wbl, wbr, h, max_steps,
              seed, path, rec_t, rec_x, rec_l, rec_s):
    """Simulate one path; returns
    ``(code, t_exit, lt, n_switch, wl_left, wl_right, x_final, n_rec)``."""
    st = stream_state(seed, path, 0)
    ev = stream_state(seed, path, 1)
    sq = math.sqrt(h)
    cut = _CUT * h
    record = rec_t.shape[0] > 0
    thr_l = math.inf
    thr_r = math.inf
    if walls:
        ev, thr_l = next_exponential(ev, wbl)
        ev, thr_r = next_exponential(ev, wbr)
        a = -1.0
        b = 1.0
    side = side0
    x = x0
    r = abs(x0)
    ev, thr = next_exponential(ev, bp if side > 0 else bm)
    cur = 0.0
    lt = 0.0
    wl = 0.0
    wr = 0.0
    nsw = 0
    t = 0.0
    has = False
    spare = 0.0
    code = TIMEOUT
    t_exit = math.nan
    n_rec = 0
    if record:
        rec_t[0] = 0.0
        rec_x[0] = x0
        rec_l[0] = 0.0
        rec_s[0] = side
        n_rec = 1
    for n in range(max_steps):
        if has:
            z = spare
            has = False
        else:
            st, u1 = next_uniform(st)
            st, u2 = next_uniform(st)
            rad = math.sqrt(-2.0 * math.log1p(-u1))
            ang = 2.0 * math.pi * u2
            z = rad * math.cos(ang)
            spare = rad * math.sin(ang)
            has = True
        z *= sq
        st, um = next_uniform(st)
        st, uM = next_uniform(st)
        vm = 1.0 - um
        vM = 1.0 - uM
        t1 = t + h
        if kind == BROWNIAN:
            xn = x + z
            if xn >= b:
                code = HIT_B
                t_exit = t + h * (b - x) / (xn - x)
                x = b
            elif xn <= a:
                code = HIT_A
                t_exit = t + h * (x - a) / (x - xn)
                x = a
            else:
                gb = (b - x) * (b - xn)
                ga = (x - a) * (xn - a)
                if gb < cut and vM < math.exp(-2.0 * gb / h):
                    code = HIT_B
                    t_exit = t1
                    x = b
                elif ga < cut and vm < math.exp(-2.0 * ga / h):
                    code = HIT_A
                    t_exit = t1
                    x = a
                else:
                    x = xn
            t = t1
            if record:
                rec_t[n_rec] = t if code == TIMEOUT else t_exit
                rec_x[n_rec] = x
                rec_l[n_rec] = 0.0
                rec_s[n_rec] = 1 if x >= 0 else -1
                n_rec += 1
            if code != TIMEOUT:
                break
            continue
        y = r + z
        dl = 0.0
        if y <= 0.0 or (r * y < cut and vm < math.exp(-2.0 * r * y / h)):
            m = 0.5 * (r + y - math.sqrt((y - r) * (y - r) - 2.0 * h * math.log(vm)))
            if m < 0.0:
                dl = -m
                y = y + dl
        if walls:
            g = (1.0 - r) * (1.0 - y)
            if y >= 1.0 or (g < cut and vM < math.exp(-2.0 * g / h)):
                mx = 0.5 * (r + y + math.sqrt((y - r) * (y - r) - 2.0 * h * math.log(vM)))
                if mx > 1.0:
                    dw = mx - 1.0
                    y = y - dw
                    if side > 0:
                        wr += dw
                        if wr >= thr_r:
                            wr = thr_r
                            code = HIT_B
                    else:
                        wl += dw
                        if wl >= thr_l:
                            wl = thr_l
                            code = HIT_A
            if code != TIMEOUT:
                t_exit = t1
        else:
            big = b if side > 0 else -a
            if y >= big:
                code = HIT_B if side > 0 else HIT_A
                t_exit = t + h * (big - r) / (y - r)
                y = big
            else:
                g = (big - r) * (big - y)
                if g < cut and vM < math.exp(-2.0 * g / h):
                    code = HIT_B if side > 0 else HIT_A
                    t_exit = t1
                    y = big
        if code != TIMEOUT:
            lt += dl
            r = y
        elif dl > 0.0:
            if kind != BROWNIAN and cur + dl >= thr:
                lt += thr - cur
                if kind == ELASTIC:
                    code = KILLED
                    t_exit = t1
                    r = 0.0
                else:
                    side = -side
                    r = 0.0
                    cur = 0.0
                    nsw += 1
                    ev, thr = next_exponential(ev, bp if side > 0 else bm)
            else:
                cur += dl
                lt += dl
                r = y
        else:
            r = y
        t = t1
        if record:
            rec_t[n_rec] = t if code == TIMEOUT else t_exit
            rec_x[n_rec] = side * r
            rec_l[n_rec] = lt
            rec_s[n_rec] = side
            n_rec += 1
        if code != TIMEOUT:
            break
    if kind == BROWNIAN:
        xf = x
    else:
        xf = side * r
    return code, t_exit, lt, nsw, wl, wr, xf, n_rec


@njit(parallel=True)
def snob_batch(kind, x0, side0, bp, bm, a, b, walls, wbl, wbr, h, max_steps,
               seed, path_offset, n_paths,
               out_code, out_t, out_l, out_n, out_wl, out_wr, out_x):
    e_t = np.empty(0)
    e_x = np.empty(0)
    e_l = np.empty(0)
    e_s = np.empty(0, dtype=np.int8)
    for i in prange(n_paths):
        res = snob_path(kind, x0, side0, bp, bm, a, b, walls, wbl, wbr, h, max_steps,
                        seed, path_offset + i, e_t, e_x, e_l, e_s)
        out_code[i] = res[0]
        out_t[i] = res[1]
        out_l[i] = res[2]
        out_n[i] = res[3]
        out_wl[i] = res[4]
        out_wr[i] = res[5]
        out_x[i] = res[6]
