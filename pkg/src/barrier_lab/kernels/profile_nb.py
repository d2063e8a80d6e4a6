"""Scalar cutoff evaluation for compiled kernels.

Mirrors ``coefficients._factor`` for one point; the profile arrives flattened
by ``coefficients.encode_profile``.
"""

import math

from .._backend import njit

TWO_PI_INV = 2.0 / math.pi


@njit
def _pchip_eval(tx, tc, z):
    n = tx.shape[0]
    if z < tx[0] or z > tx[n - 1]:
        return 1.0, 0.0
    lo = 0
    hi = n - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if tx[mid] <= z:
            lo = mid
        else:
            hi = mid
    if lo > n - 2:
        lo = n - 2
    t = z - tx[lo]
    c0 = tc[lo, 0]
    c1 = tc[lo, 1]
    c2 = tc[lo, 2]
    c3 = tc[lo, 3]
    v = ((c0 * t + c1) * t + c2) * t + c3
    d = (3.0 * c0 * t + 2.0 * c1) * t + c2
    if v <= 0.0:
        return 0.0, 0.0
    if v >= 1.0:
        return 1.0, 0.0
    return v, d


@njit
def factor2(code, eps, alpha, value, z, tx, tc):
    """Return ``(chi(z)**2, d/dz chi(z)**2)`` for one cutoff factor."""
    az = abs(z)
    s = 1.0 if z > 0 else (-1.0 if z < 0 else 0.0)
    if code == 0:
        if az < eps:
            v = az / eps
            c = 0.5 * v ** alpha
            if az == 0.0:
                return 0.0, 0.0
            return c * c, s * 0.5 * alpha / eps * v ** (2.0 * alpha - 1.0)
        if az < 2.0 * eps:
            u = (2.0 * eps - az) / eps
            c = 1.0 - 0.5 * u ** alpha
            return c * c, s * 2.0 * c * 0.5 * alpha / eps * u ** (alpha - 1.0)
        return 1.0, 0.0
    if code == 1:
        t = math.atan(z / eps)
        dt = 1.0 / (eps * (1.0 + (z / eps) ** 2))
        c = TWO_PI_INV * t
        return c * c, 2.0 * TWO_PI_INV * TWO_PI_INV * t * dt
    if code == 2:
        c, d = _pchip_eval(tx, tc, z)
        return c * c, 2.0 * c * d
    if code == 3:
        if az < eps:
            return (z / eps) ** 2, 2.0 * z / (eps * eps)
        return 1.0, 0.0
    return value * value, 0.0


@njit
def chibar2(code, p, tx, tc, x):
    """``(chibar(x)**2, d/dx chibar(x)**2)`` for an encoded profile."""
    c2, d2 = factor2(code, p[0], p[1], p[2], x, tx, tc)
    if p[3] == 0.0:
        return c2, d2
    bcode = int(p[4])
    l2, dl2 = factor2(bcode, p[5], p[6], p[2], x + 1.0, tx, tc)
    r2, dr2 = factor2(bcode, p[5], p[6], p[2], x - 1.0, tx, tc)
    return c2 * l2 * r2, d2 * l2 * r2 + c2 * dl2 * r2 + c2 * l2 * dr2
