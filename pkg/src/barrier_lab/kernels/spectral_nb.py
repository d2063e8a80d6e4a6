"""Compensated summation for the spectral mode sums."""

import math

import numpy as np

from .._backend import njit


@njit
def neumaier_sum(v):
    """Neumaier (improved Kahan) sum of a 1-d array, in index order."""
    s = 0.0
    c = 0.0
    for i in range(v.shape[0]):
        x = v[i]
        t = s + x
        if abs(s) >= abs(x):
            c += (s - t) + x
        else:
            c += (x - t) + s
        s = t
    return s + c


@njit
def neumaier_rows(m):
    out = np.empty(m.shape[0])
    for j in range(m.shape[0]):
        out[j] = neumaier_sum(m[j])
    return out


def fsum_rows(m):
    """numpy-backend twin: correctly rounded row sums."""
    return np.array([math.fsum(row) for row in np.asarray(m)])
