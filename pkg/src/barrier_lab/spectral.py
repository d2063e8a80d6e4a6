"""Turbulent velocity basis and the diagonal covariance it induces.

Modes are indexed by ``k = (pi m, k2)`` with integers ``m, k2 != 0`` and index
norm ``sqrt(m**2 + k2**2)`` in ``[N, 2N]``.  With ``k_perp = (-k2, k1)`` and
``grad_perp f = (-f_y, f_x)``,

    sigma_k = grad_perp[sin(k.x) chibar(x)] / |k|     (k1 > 0),
    sigma_k = grad_perp[cos(k.x) chibar(x)] / |k|     (k1 < 0),

and ``Q(x, x) = (1/(2 c_N**2)) sum_k sigma_k (x) sigma_k``, with
``c_N**2 = Card(K_N ∩ Z2_{++}) / 2``.  Splitting each sigma into its
``chibar`` part ``A`` and ``chibar'`` part ``B`` gives the eight terms
``A⊗A, A⊗B, B⊗A, B⊗B`` on each half-lattice; the main term is
``Qbar = Q1 + Q5`` and the rest is the remainder ``R``.

Only smooth profiles are accepted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .coefficients import (CutoffProfile, ModelParams, ParameterError, chibar_deriv,
                           chibar_eval)
from .kernels import spectral_nb as _nb
from .rng import DEFAULT_SEED, normals

MAX_MODES = 50_000_000
QUADRANTS = ("++", "+-", "-+", "--")


class ResourceError(RuntimeError):
    """Index set larger than the configured cap."""


def _rowsum(m):
    if _backend.backend() == "numpy":
        return _nb.fsum_rows(m)
    return _nb.neumaier_rows(np.ascontiguousarray(m, dtype=np.float64))


@dataclass
class SpectralSet:
    """Index set ``K_N`` in canonical order.

    ``m, k2`` hold the first-quadrant integer pairs in lexicographic order;
    ``k`` has shape ``(4 * n_pp, 2)`` and runs through them with the
    quadrants ``++, +-, -+, --`` innermost.
    """

    N: int
    m: np.ndarray
    k2: np.ndarray
    k: np.ndarray
    quadrant: np.ndarray
    c_N: float

    @property
    def card_pp(self):
        return int(self.m.size)

    @property
    def card(self):
        return int(self.k.shape[0])

    @property
    def coeff(self):
        """``C(k, N) = 1/c_N`` on ``K_N``."""
        return 1.0 / self.c_N

    def quadrant_counts(self):
        return {q: int((self.quadrant == i).sum()) for i, q in enumerate(QUADRANTS)}

    def plus(self):
        """Mask of the half-lattice ``k1 > 0``."""
        return self.k[:, 0] > 0


def card_pp(N):
    """``Card(K_N ∩ Z2_{++})`` by direct counting."""
    if N < 1:
        raise ParameterError("N must be >= 1")
    m = np.arange(1, 2 * N + 1, dtype=np.int64)
    lo, hi = N * N, 4 * N * N
    tot = 0
    for mm in m:
        r_lo = lo - mm * mm
        r_hi = hi - mm * mm
        if r_hi < 1:
            continue
        a = 1 if r_lo <= 1 else math.isqrt(r_lo - 1) + 1
        b = math.isqrt(r_hi)
        tot += max(0, b - a + 1)
    return int(tot)


def card_asymptotic(N):
    return 0.75 * math.pi * N * N


def build_index_set(N, cap=MAX_MODES) -> SpectralSet:
    """Enumerate ``K_N``.

    Raises
    ------
    ResourceError
        When the mode count ``4 Card_{++}`` exceeds ``cap``.
    """
    if not (isinstance(N, (int, np.integer)) and N >= 1):
        raise ParameterError("N must be an integer >= 1")
    est = 4 * card_asymptotic(N) * 1.05 + 16
    if est > cap:
        raise ResourceError(f"K_N for N={N} has about {int(est)} modes, above the cap {cap}")
    r = np.arange(1, 2 * N + 1, dtype=np.int64)
    mm, kk = np.meshgrid(r, r, indexing="ij")
    s = mm * mm + kk * kk
    keep = (s >= N * N) & (s <= 4 * N * N)
    m = mm[keep]
    k2 = kk[keep]
    n = m.size
    if 4 * n > cap:
        raise ResourceError(f"K_N for N={N} has {4 * n} modes, above the cap {cap}")
    signs = np.array([(1, 1), (1, -1), (-1, 1), (-1, -1)], dtype=float)
    k = np.empty((n, 4, 2))
    k[:, :, 0] = math.pi * m[:, None] * signs[None, :, 0]
    k[:, :, 1] = k2[:, None] * signs[None, :, 1]
    quad = np.tile(np.arange(4, dtype=np.int8), n)
    return SpectralSet(int(N), m, k2, k.reshape(-1, 2), quad, math.sqrt(n / 2.0))


def _check_smooth(profile: CutoffProfile, params):
    prof = profile.resolve(params)
    if not prof.is_smooth:
        raise ParameterError(
            f"spectral operations need a smooth profile; {prof.kind} has a non-smooth cutoff")
    return prof


def _chi_pair(prof, params, x):
    c = np.asarray(chibar_eval(prof, params, x), dtype=float)
    d = np.asarray(chibar_deriv(prof, params, x), dtype=float)
    return c, d


def _parts(k, c, d, x, y):
    """``A`` and ``B`` parts of every sigma_k at one point (arrays (n, 2))."""
    kn = np.hypot(k[:, 0], k[:, 1])
    ph = k[:, 0] * x + k[:, 1] * y
    plus = k[:, 0] > 0
    s, co = np.sin(ph), np.cos(ph)
    # k1 > 0: d/dx, d/dy of sin act as cos; k1 < 0: cos gives -sin
    trig_a = np.where(plus, co, -s)
    trig_b = np.where(plus, s, co)
    kp = np.stack([-k[:, 1], k[:, 0]], axis=1)
    A = (c * trig_a / kn)[:, None] * kp
    B = np.zeros_like(A)
    B[:, 1] = d * trig_b / kn
    return A, B, plus


def sigma_k_eval(k, params: ModelParams, profile: CutoffProfile, x, y):
    """``sigma_k(x, y)`` for one mode ``k = (k1, k2)``; returns a 2-vector."""
    prof = _check_smooth(profile, params)
    k = np.asarray(k, dtype=float).reshape(1, 2)
    if k[0, 0] == 0 or k[0, 1] == 0:
        raise ParameterError("k must have nonzero components")
    c, d = _chi_pair(prof, params, float(x))
    A, B, _ = _parts(k, float(c), float(d), float(x), float(y))
    return (A + B)[0]


@dataclass
class CovarianceDiag:
    """``Q(x, x)``, its main part and remainder, plus the eight terms."""

    q_full: np.ndarray
    q_bar: np.ndarray
    r: np.ndarray
    at: tuple
    terms: np.ndarray
    anisotropy: float
    chibar2: float

    def trace_ratio(self):
        """``trace(q_bar)/chibar**2``; 2 for every point with chibar != 0."""
        return float(np.trace(self.q_bar) / self.chibar2) if self.chibar2 > 0 else math.nan


def _outer_sum(U, V, w):
    rows = np.stack([U[:, 0] * V[:, 0], U[:, 0] * V[:, 1], U[:, 1] * V[:, 0], U[:, 1] * V[:, 1]])
    return (_rowsum(rows) * w).reshape(2, 2)


def covariance_diagonal(sset: SpectralSet, params: ModelParams, profile: CutoffProfile, x, y):
    """Eight-term decomposition of ``Q(x, x)`` by direct mode summation.

    ``terms[j]`` is Q^(j+1): j = 0..3 are ``A⊗A, A⊗B, B⊗A, B⊗B`` over
    ``k1 > 0``, j = 4..7 the same over ``k1 < 0``.  ``q_bar = Q1 + Q5``,
    ``q_full`` sums all eight and ``r = q_full - q_bar``.
    """
    prof = _check_smooth(profile, params)
    if not (-1.0 <= x <= 1.0):
        raise ParameterError("x must lie in [-1, 1]")
    c, d = _chi_pair(prof, params, float(x))
    c, d = float(c), float(d)
    A, B, plus = _parts(sset.k, c, d, float(x), float(y))
    w = 1.0 / (2.0 * sset.c_N ** 2)
    terms = np.zeros((8, 2, 2))
    for half, mask in enumerate((plus, ~plus)):
        a, b = A[mask], B[mask]
        terms[4 * half + 0] = _outer_sum(a, a, w)
        terms[4 * half + 1] = _outer_sum(a, b, w)
        terms[4 * half + 2] = _outer_sum(b, a, w)
        terms[4 * half + 3] = _outer_sum(b, b, w)
    q_bar = terms[0] + terms[4]
    q_full = terms.sum(axis=0)
    r = q_full - q_bar
    return CovarianceDiag(q_full, q_bar, r, (float(x), float(y)), terms,
                          lattice_anisotropy(sset), c * c)


def lattice_sum(sset: SpectralSet):
    """``S = sum_{k1 > 0} k_perp ⊗ k_perp / |k|**2`` with compensated sums."""
    k = sset.k[sset.plus()]
    n2 = k[:, 0] ** 2 + k[:, 1] ** 2
    rows = np.stack([k[:, 1] ** 2 / n2, -k[:, 1] * k[:, 0] / n2, k[:, 0] ** 2 / n2])
    s11, s12, s22 = _rowsum(rows)
    return np.array([[s11, s12], [s12, s22]])


def lattice_anisotropy(sset: SpectralSet):
    """``S_11 / S_22``; 1 would mean the isotropic identity ``S = Card_{++} I``."""
    S = lattice_sum(sset)
    return float(S[0, 0] / S[1, 1])


def remainder_bound(sset: SpectralSet, params: ModelParams, profile: CutoffProfile,
                    probe=17, y_probe=(0.0, 1.0, 2.5)):
    """Analytic bound and measured sup of ``||R(x, x)||_2`` on a probe grid.

    The bound is ``(1/c_N**2) Card(K_N ∩ Z2_+) (1/N + 1/N**2) M`` with
    ``M = sup (2 |chibar chibar'| + chibar'**2)`` over the probe points, the
    form in which every remainder term keeps at least one ``1/|k|``.

    Returns
    -------
    dict
        ``bound``, ``measured``, ``argmax`` and the probe arrays.
    """
    prof = _check_smooth(profile, params)
    xs = np.linspace(-1.0, 1.0, int(probe) + 2)[1:-1]
    c, d = _chi_pair(prof, params, xs)
    M = float(np.max(2.0 * np.abs(c * d) + d * d))
    card_plus = int(sset.plus().sum())
    N = sset.N
    bound = card_plus / sset.c_N ** 2 * (1.0 / N + 1.0 / N ** 2) * M
    norms = np.zeros((xs.size, len(y_probe)))
    for i, xv in enumerate(xs):
        for j, yv in enumerate(y_probe):
            cd = covariance_diagonal(sset, params, prof, float(xv), float(yv))
            norms[i, j] = np.linalg.norm(cd.r, 2)
    i, j = np.unravel_index(np.argmax(norms), norms.shape)
    return dict(bound=bound, measured=float(norms[i, j]), argmax=(float(xs[i]), float(y_probe[j])),
                xs=xs, norms=norms, M=M)


def velocity_sample(sset: SpectralSet, params: ModelParams, profile: CutoffProfile, xs, ys,
                    seed=DEFAULT_SEED, sample=0):
    """One spatial sample ``u = sqrt(kappa_T) sum_k C(k, N) sigma_k xi_k``.

    ``xi_k`` are independent standard normals indexed by the mode's
    canonical position; ``sample`` selects an independent draw.  Returns an
    array of shape ``(len(xs), len(ys), 2)``.  Its pointwise covariance is
    ``kappa_T sum C**2 sigma⊗sigma = 2 kappa_T Q(x, x)``.
    """
    prof = _check_smooth(profile, params)
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    n = sset.card
    xi = normals(seed, n, path_offset=int(sample) * n)
    amp = math.sqrt(params.kappa_T) * sset.coeff
    out = np.zeros((xs.size, ys.size, 2))
    for i, xv in enumerate(xs):
        c, d = _chi_pair(prof, params, float(xv))
        for j, yv in enumerate(ys):
            A, B, _ = _parts(sset.k, float(c), float(d), float(xv), float(yv))
            out[i, j] = amp * ((A + B) * xi[:, None]).sum(axis=0)
    return out


def velocity_covariance_prediction(sset: SpectralSet, params: ModelParams, profile: CutoffProfile, x, y):
    """Predicted covariance matrix of :func:`velocity_sample` at one point."""
    return 2.0 * params.kappa_T * covariance_diagonal(sset, params, profile, x, y).q_full
