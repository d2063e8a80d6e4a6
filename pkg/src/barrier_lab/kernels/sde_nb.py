"""Compiled Euler-Maruyama kernels for the pre-limit diffusions.

Mode 0 simulates ``(X, Y)`` with

    dX = kappa_T (chibar**2)'(X) dt + sqrt(2 a(X)) dW1,
    dY = sqrt(2 a(X)) dW2,

and accumulates the clock ``beta_t = 2 int a(X_s) ds`` by the trapezoid rule.
Mode 1 simulates the time-changed ``dX = (kappa_T/2) (chibar**2)'/a dt + dW``.

A step of size h is split into substeps whenever ``|drift| * h`` exceeds a
quarter of the profile length scale, with at most 64 substeps; the drift at
exactly x = 0 is 0.  Each substep consumes two normals (mode 0) or one (mode 1)
plus one uniform for the Brownian-bridge exit test.
"""

import math

import numpy as np

from .._backend import njit, prange
from ..rng import next_uniform, stream_state
from .profile_nb import chibar2

MAX_SUB = 64
_CUT = 25.0


@njit
def _coef(mode, ke, kt, code, p, tx, tc, x):
    c2, d2 = chibar2(code, p, tx, tc, x)
    a = ke + kt * c2
    if x == 0.0:
        drift = 0.0
    elif mode == 0:
        drift = kt * d2
    else:
        drift = 0.5 * kt * d2 / a
    return a, drift


@njit
def sde_path(mode, ke, kt, code, p, tx, tc, ell, x0, y0, h, t_max, bridge, seed, path,
             rec_t, rec_x, rec_y, rec_c):
    """One path; returns ``(code, t_end, clock, x, y, n_sub, n_rec, overflow)``.

    ``code`` is -1 for an exit through x = -1, +1 through x = 1, 0 when
    ``t_max`` was reached first.
    """
    st = stream_state(seed, path, 0)
    cap = rec_t.shape[0]
    x = x0
    y = y0
    t = 0.0
    clock = 0.0
    has = False
    spare = 0.0
    a, drift = _coef(mode, ke, kt, code, p, tx, tc, x)
    n_sub = 0
    n_rec = 0
    overflow = False
    twopi = 2.0 * math.pi
    if cap > 0:
        rec_t[0] = 0.0
        rec_x[0] = x
        rec_y[0] = y
        rec_c[0] = 0.0
        n_rec = 1
    out = 0
    hmin = h / MAX_SUB
    lim = 0.25 * ell
    while t < t_max and out == 0:
        step = min(h, t_max - t)
        if step <= 0.0:
            break
        rem = step
        k = 0
        while rem > 0.0 and out == 0:
            dt = rem
            if abs(drift) * dt > lim:
                dt = max(hmin, lim / abs(drift))
                if dt > rem or k == MAX_SUB - 1:
                    dt = rem
            k += 1
            n_sub += 1
            # normals
            if has:
                z1 = spare
                has = False
            else:
                st, u1 = next_uniform(st)
                st, u2 = next_uniform(st)
                rad = math.sqrt(-2.0 * math.log1p(-u1))
                z1 = rad * math.cos(twopi * u2)
                spare = rad * math.sin(twopi * u2)
                has = True
            z2 = 0.0
            if mode == 0:
                if has:
                    z2 = spare
                    has = False
                else:
                    st, u1 = next_uniform(st)
                    st, u2 = next_uniform(st)
                    rad = math.sqrt(-2.0 * math.log1p(-u1))
                    z2 = rad * math.cos(twopi * u2)
                    spare = rad * math.sin(twopi * u2)
                    has = True
            st, ub = next_uniform(st)
            sdt = math.sqrt(dt)
            sig = math.sqrt(2.0 * a) if mode == 0 else 1.0
            xn = x + drift * dt + sig * sdt * z1
            if abs(xn) >= 1.0:
                bnd = 1.0 if xn > 0 else -1.0
                th = (bnd - x) / (xn - x)
                an, dn = _coef(mode, ke, kt, code, p, tx, tc, bnd)
                clock += th * dt * (a + an)
                t += th * dt
                x = bnd
                y = (y + th * sig * sdt * z2) % twopi
                out = 1 if bnd > 0 else -1
            else:
                if bridge:
                    v = sig * sig * dt
                    gu = (1.0 - x) * (1.0 - xn)
                    gl = (1.0 + x) * (1.0 + xn)
                    if gu < _CUT * v and (1.0 - ub) < math.exp(-2.0 * gu / v):
                        out = 1
                    elif gl < _CUT * v and (1.0 - ub) < math.exp(-2.0 * gl / v):
                        out = -1
                if out != 0:
                    xn = float(out)
                an, dn = _coef(mode, ke, kt, code, p, tx, tc, xn)
                clock += dt * (a + an)
                t += dt
                y = (y + sig * sdt * z2) % twopi
                x = xn
                a = an
                drift = dn
            rem -= dt
            if cap > 0:
                if n_rec < cap:
                    rec_t[n_rec] = t
                    rec_x[n_rec] = x
                    rec_y[n_rec] = y
                    rec_c[n_rec] = clock
                    n_rec += 1
                else:
                    overflow = True
    return out, t, clock, x, y, n_sub, n_rec, overflow


@njit(parallel=True)
def sde_batch(mode, ke, kt, code, p, tx, tc, ell, x0, y0, h, t_max, bridge, seed,
              path_offset, n_paths, out_code, out_t, out_clock, out_x, out_y, out_sub):
    e = np.empty(0)
    for i in prange(n_paths):
        res = sde_path(mode, ke, kt, code, p, tx, tc, ell, x0, y0, h, t_max, bridge, seed,
                       path_offset + i, e, e, e, e)
        out_code[i] = res[0]
        out_t[i] = res[1]
        out_clock[i] = res[2]
        out_x[i] = res[3]
        out_y[i] = res[4]
        out_sub[i] = res[5]
