"""Compiled 5-point stencil and Jacobi-preconditioned CG.

The operator acts on cell values ``T[i, j]`` (i along x, j along the
periodic y direction) as

    (A T)_ij = (gx[i] + gx[i+1] + 2 gy[i] + m[i]) T_ij
               - gx[i] T_{i-1,j} - gx[i+1] T_{i+1,j} - gy[i] (T_{i,j-1} + T_{i,j+1})

with ``gx`` of length nx+1 (the two end entries couple to the Dirichlet
boundary and contribute only to the diagonal).
"""

import math

import numpy as np

from .._backend import njit


@njit
def matvec(gx, gy, m, T, out):
    nx, ny = T.shape
    for i in range(nx):
        d = gx[i] + gx[i + 1] + 2.0 * gy[i] + m[i]
        for j in range(ny):
            jm = j - 1 if j > 0 else ny - 1
            jp = j + 1 if j < ny - 1 else 0
            v = d * T[i, j] - gy[i] * (T[i, jm] + T[i, jp])
            if i > 0:
                v -= gx[i] * T[i - 1, j]
            if i < nx - 1:
                v -= gx[i + 1] * T[i + 1, j]
            out[i, j] = v


@njit
def _dot(a, b):
    s = 0.0
    nx, ny = a.shape
    for i in range(nx):
        for j in range(ny):
            s += a[i, j] * b[i, j]
    return s


@njit
def pcg(gx, gy, m, b, x, rtol, maxit):
    """Solve ``A x = b`` in place from the initial ``x``.

    Returns ``(iterations, relative_residual)``; the residual is relative to
    ``||b||``.
    """
    nx, ny = b.shape
    dinv = np.empty(nx)
    for i in range(nx):
        dinv[i] = 1.0 / (gx[i] + gx[i + 1] + 2.0 * gy[i] + m[i])
    r = np.empty_like(b)
    matvec(gx, gy, m, x, r)
    for i in range(nx):
        for j in range(ny):
            r[i, j] = b[i, j] - r[i, j]
    bn = math.sqrt(_dot(b, b))
    if bn == 0.0:
        bn = 1.0
    z = np.empty_like(b)
    for i in range(nx):
        for j in range(ny):
            z[i, j] = dinv[i] * r[i, j]
    p = z.copy()
    q = np.empty_like(b)
    rz = _dot(r, z)
    res = math.sqrt(_dot(r, r)) / bn
    it = 0
    while res > rtol and it < maxit:
        matvec(gx, gy, m, p, q)
        alpha = rz / _dot(p, q)
        for i in range(nx):
            for j in range(ny):
                x[i, j] += alpha * p[i, j]
                r[i, j] -= alpha * q[i, j]
                z[i, j] = dinv[i] * r[i, j]
        rz_new = _dot(r, z)
        beta = rz_new / rz
        rz = rz_new
        for i in range(nx):
            for j in range(ny):
                p[i, j] = z[i, j] + beta * p[i, j]
        it += 1
        if it % 50 == 0:
            # refresh the recursive residual against drift
            matvec(gx, gy, m, x, q)
            for i in range(nx):
                for j in range(ny):
                    r[i, j] = b[i, j] - q[i, j]
        res = math.sqrt(_dot(r, r)) / bn
    return it, res
