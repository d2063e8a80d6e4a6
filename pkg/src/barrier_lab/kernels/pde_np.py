"""numpy twin of :mod:`pde_nb` (same algorithm, vectorized sweeps)."""

import numpy as np


def matvec(gx, gy, m, T):
    d = gx[:-1] + gx[1:] + 2.0 * gy + m
    out = d[:, None] * T - gy[:, None] * (np.roll(T, 1, axis=1) + np.roll(T, -1, axis=1))
    out[1:] -= gx[1:-1, None] * T[:-1]
    out[:-1] -= gx[1:-1, None] * T[1:]
    return out


def pcg(gx, gy, m, b, x, rtol, maxit):
    dinv = 1.0 / (gx[:-1] + gx[1:] + 2.0 * gy + m)
    r = b - matvec(gx, gy, m, x)
    bn = np.sqrt(np.vdot(b, b)) or 1.0
    z = dinv[:, None] * r
    p = z.copy()
    rz = np.vdot(r, z)
    res = np.sqrt(np.vdot(r, r)) / bn
    it = 0
    while res > rtol and it < maxit:
        q = matvec(gx, gy, m, p)
        alpha = rz / np.vdot(p, q)
        x += alpha * p
        r -= alpha * q
        z = dinv[:, None] * r
        rz_new = np.vdot(r, z)
        p = z + (rz_new / rz) * p
        rz = rz_new
        it += 1
        if it % 50 == 0:
            r = b - matvec(gx, gy, m, x)
        res = np.sqrt(np.vdot(r, r)) / bn
    return it, float(res)
