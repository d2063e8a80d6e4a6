"""Vectorized numpy twin of :mod:`sde_nb`.

Paths advance through the same substep sequence as the compiled kernel; the
inner loop runs until every live path has used up its current step.
"""

import numpy as np

from ..coefficients import chibar2_deriv, chibar2_eval
from ..rng import NormalCacheVec, next_uniform_vec, stream_states_vec
from .sde_nb import MAX_SUB, _CUT


class _Coef:
    def __init__(self, mode, params, profile):
        self.mode = mode
        self.ke = params.kappa_eps
        self.kt = params.kappa_T
        self.params = params
        self.profile = profile

    def __call__(self, x):
        c2 = np.asarray(chibar2_eval(self.profile, self.params, x), dtype=float)
        d2 = np.asarray(chibar2_deriv(self.profile, self.params, x), dtype=float)
        a = self.ke + self.kt * c2
        if self.mode == 0:
            drift = self.kt * d2
        else:
            drift = 0.5 * self.kt * d2 / a
        drift = np.where(x == 0.0, 0.0, drift)
        return a, drift


def sde_batch(mode, params, profile, ell, x0, y0, h, t_max, bridge, seed, path_offset, n_paths,
              record=False):
    """Run ``n_paths`` paths; returns a dict of per-path arrays.

    With ``record`` (sensible only for a handful of paths) the dict carries
    lists ``rec_t, rec_x, rec_y, rec_c`` of per-path arrays.
    """
    coef = _Coef(mode, params, profile)
    n = int(n_paths)
    twopi = 2.0 * np.pi
    paths = np.arange(path_offset, path_offset + n, dtype=np.uint64)
    old = np.seterr(over="ignore", under="ignore")
    try:
        st = stream_states_vec(seed, paths, 0)
        cache = NormalCacheVec(n)
        x = np.full(n, float(x0))
        y = np.full(n, float(y0))
        t = np.zeros(n)
        clock = np.zeros(n)
        a, drift = coef(x)
        out = np.zeros(n, dtype=np.int64)
        n_sub = np.zeros(n, dtype=np.int64)
        recs = [[(0.0, float(x0), float(y0), 0.0)] for _ in range(n)] if record else None
        hmin = h / MAX_SUB
        lim = 0.25 * ell
        live = np.nonzero(t < t_max)[0]
        while live.size:
            rem = np.minimum(h, t_max - t[live])
            k = np.zeros(live.size, dtype=np.int64)
            act = np.arange(live.size)
            while act.size:
                idx = live[act]
                r = rem[act]
                dr = np.abs(drift[idx])
                dt = r.copy()
                big = dr * dt > lim
                if big.any():
                    with np.errstate(divide="ignore"):
                        d = np.maximum(hmin, lim / dr[big])
                    force = (d > r[big]) | (k[act][big] == MAX_SUB - 1)
                    dt[big] = np.where(force, r[big], d)
                k[act] += 1
                n_sub[idx] += 1
                z1 = cache.draw(st, idx)
                z2 = cache.draw(st, idx) if mode == 0 else np.zeros(idx.size)
                s = st[idx]
                ub = next_uniform_vec(s)
                st[idx] = s
                sdt = np.sqrt(dt)
                ao = a[idx]
                xo = x[idx]
                sig = np.sqrt(2.0 * ao) if mode == 0 else np.ones(idx.size)
                xn = xo + drift[idx] * dt + sig * sdt * z1
                cross = np.abs(xn) >= 1.0
                bnd = np.where(xn > 0, 1.0, -1.0)
                with np.errstate(divide="ignore", invalid="ignore"):
                    th = np.where(cross, (bnd - xo) / (xn - xo), 1.0)
                xe = np.where(cross, bnd, xn)
                code = np.where(cross, np.where(bnd > 0, 1, -1), 0)
                if bridge:
                    v = sig * sig * dt
                    gu = (1.0 - xo) * (1.0 - xn)
                    gl = (1.0 + xo) * (1.0 + xn)
                    with np.errstate(divide="ignore", invalid="ignore"):
                        up = ~cross & (gu < _CUT * v) & ((1.0 - ub) < np.exp(-2.0 * gu / v))
                        lo = ~cross & ~up & (gl < _CUT * v) & ((1.0 - ub) < np.exp(-2.0 * gl / v))
                    code = np.where(up, 1, np.where(lo, -1, code))
                    xe = np.where(up | lo, code.astype(float), xe)
                an, dn = coef(xe)
                fr = th * dt
                clock[idx] += fr * (ao + an)
                t[idx] += fr
                y[idx] = (y[idx] + th * sig * sdt * z2) % twopi
                x[idx] = xe
                a[idx] = an
                drift[idx] = dn
                out[idx] = code
                rem[act] = r - dt
                if record:
                    for j, i in enumerate(idx):
                        recs[i].append((t[i], x[i], y[i], clock[i]))
                keep = (rem[act] > 0.0) & (code == 0)
                act = act[keep]
            live = live[(out[live] == 0) & (t[live] < t_max)]
    finally:
        np.seterr(**old)
    res = dict(code=out, t_end=t, clock=clock, x=x, y=y, n_sub=n_sub)
    if record:
        arr = [np.asarray(rc) for rc in recs]
        res.update(rec_t=[r[:, 0] for r in arr], rec_x=[r[:, 1] for r in arr],
                   rec_y=[r[:, 2] for r in arr], rec_c=[r[:, 3] for r in arr])
    return res
