"""Model parameters and cutoff profiles.

The turbulent diffusivity is switched off near the barrier at ``x = 0`` and
near the walls ``x = -1, 1`` by a cutoff

    chibar(x) = chi_bdr(x - 1) * chi_bdr(x + 1) * chi(x),

so the effective diffusivity of the reduced problem is
``a(x) = kappa_eps + kappa_T * chibar(x)**2``.

Profile families
----------------
PiecewisePower
    ``chi = (x/eps)**alpha / 2`` on [0, eps), ``1 - ((2 eps - x)/eps)**alpha / 2``
    on [eps, 2 eps), 1 beyond; even.  Hoelder at 0 when ``alpha < 1``.
ArctanExample
    ``chibar**2 = ((2/pi)**3 atan(x/eps) atan(1e4 (x-1)) atan(1e4 (x+1)))**2``.
    It factors as barrier ``(2/pi)|atan(x/eps)|`` times boundary factors of
    width 1e-4.
Tabulated
    Monotone cubic (PCHIP) through user points, clamped to [0, 1], equal to 1
    outside the table.
QuadraticBarrier
    ``chi = min(|x|/eps, 1)``, i.e. ``chi**2 = (x/eps)**2`` on [-eps, eps]; the
    model barrier used for the barrier-height estimate.
Constant
    ``chibar = c`` everywhere, with no boundary layers (``c = 0`` is pure
    molecular diffusion, ``c = 1`` pure turbulent diffusion).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

ARCTAN_WALL_SCALE = 1.0e4

KIND_PIECEWISE = "PiecewisePower"
KIND_ARCTAN = "ArctanExample"
KIND_TABULATED = "Tabulated"
KIND_QUADRATIC = "QuadraticBarrier"
KIND_CONSTANT = "Constant"
KINDS = (KIND_PIECEWISE, KIND_ARCTAN, KIND_TABULATED, KIND_QUADRATIC, KIND_CONSTANT)

# integer codes shared with the compiled kernels (see kernels.profile_nb)
CODE = {KIND_PIECEWISE: 0, KIND_ARCTAN: 1, KIND_TABULATED: 2,
        KIND_QUADRATIC: 3, KIND_CONSTANT: 4}


class ParameterError(ValueError):
    """Invalid model or profile parameters."""


class DomainError(ValueError):
    """Evaluation at a point where the requested quantity is undefined."""


@dataclass(frozen=True)
class ModelParams:
    """Scalar model parameters.

    Parameters
    ----------
    eps : float
        Barrier half-scale, ``0 < eps < 1/8`` so that the barrier layer
        [-4 eps, 4 eps] and the wall layers stay disjoint.
    kappa_eps : float
        Molecular diffusivity.
    kappa_T : float
        Turbulent diffusivity.
    alpha : float
        Cutoff power of the piecewise family.
    K : float
        Scaling constant.
    T_plus : float
        Temperature of the hot wall ``x = -1``.

    Notes
    -----
    Zero diffusivities are accepted (``kappa_eps + kappa_T > 0`` is still
    required) because several limiting cases are stated with one of them
    switched off.  The config loader is stricter.
    """

    eps: float
    kappa_eps: float
    kappa_T: float
    alpha: float = 1.0
    K: float = 1.0
    T_plus: float = 2.0

    def __post_init__(self):
        for name in ("eps", "kappa_eps", "kappa_T", "alpha", "K", "T_plus"):
            v = getattr(self, name)
            if not isinstance(v, (int, float, np.floating, np.integer)) or not math.isfinite(v):
                raise ParameterError(f"{name} must be a finite number, got {v!r}")
        if not 0.0 < self.eps < 0.125:
            raise ParameterError(
                f"eps={self.eps} violates 0 < eps < 1/8 (barrier and wall layers must be separated)")
        if self.kappa_eps < 0 or self.kappa_T < 0:
            raise ParameterError("kappa_eps and kappa_T must be nonnegative")
        if self.kappa_eps + self.kappa_T <= 0:
            raise ParameterError("kappa_eps + kappa_T must be positive")
        for name in ("alpha", "K", "T_plus"):
            if getattr(self, name) <= 0:
                raise ParameterError(f"{name} must be positive")

    @classmethod
    def scaling_law(cls, eps, K=1.0, kappa_T=0.1, alpha=1.0, T_plus=2.0):
        """Parameters on the critical line ``kappa_eps = (K eps)**2 kappa_T``."""
        return cls(eps=eps, kappa_eps=(K * eps) ** 2 * kappa_T, kappa_T=kappa_T,
                   alpha=alpha, K=K, T_plus=T_plus)

    @property
    def ratio(self):
        """``kappa_T / kappa_eps`` (``inf`` when ``kappa_eps == 0``)."""
        return math.inf if self.kappa_eps == 0 else self.kappa_T / self.kappa_eps

    def with_(self, **kw):
        return replace(self, **kw)


@dataclass(frozen=True)
class CutoffProfile:
    """Barrier and boundary cutoffs.

    ``eps`` and ``alpha`` left as ``None`` are taken from the ModelParams the
    profile is evaluated with.  ``boundary`` describes ``chi_bdr``; ``None``
    means the same family and scale as the barrier.
    """

    kind: str
    eps: float | None = None
    alpha: float | None = None
    value: float = 1.0
    table_x: tuple = field(default=(), repr=False)
    table_chi: tuple = field(default=(), repr=False)
    boundary: "CutoffProfile | None" = None
    includes_boundary_layers: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown profile kind {self.kind!r}; expected one of {KINDS}")
        if self.eps is not None and not self.eps > 0:
            raise ParameterError("profile eps must be positive")
        if self.alpha is not None and not self.alpha > 0:
            raise ParameterError("profile alpha must be positive")
        if self.kind == KIND_CONSTANT and not 0.0 <= self.value <= 1.0:
            raise ParameterError("constant profile value must lie in [0, 1]")
        if self.boundary is not None and self.boundary.kind not in (KIND_PIECEWISE, KIND_ARCTAN, KIND_QUADRATIC):
            raise ParameterError("boundary cutoff must be PiecewisePower, ArctanExample or QuadraticBarrier")

    # constructors -----------------------------------------------------
    @classmethod
    def piecewise_power(cls, alpha=None, eps=None, boundary_layers=True):
        return cls(KIND_PIECEWISE, eps=eps, alpha=alpha, includes_boundary_layers=boundary_layers)

    @classmethod
    def arctan_example(cls, eps=None):
        return cls(KIND_ARCTAN, eps=eps, includes_boundary_layers=True)

    @classmethod
    def quadratic_barrier(cls, eps=None, boundary_layers=False):
        return cls(KIND_QUADRATIC, eps=eps, includes_boundary_layers=boundary_layers)

    @classmethod
    def constant(cls, value):
        return cls(KIND_CONSTANT, value=float(value), includes_boundary_layers=False)

    @classmethod
    def tabulated(cls, x, chi, eps, boundary_layers=True):
        x = np.asarray(x, dtype=float)
        chi = np.asarray(chi, dtype=float)
        _check_table(x, chi, eps)
        return cls(KIND_TABULATED, eps=eps, table_x=tuple(x), table_chi=tuple(chi),
                   includes_boundary_layers=boundary_layers)

    @classmethod
    def from_csv(cls, path, eps, boundary_layers=True):
        """Load a two-column ``x, chi`` CSV with a header row."""
        xs, cs = [], []
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
        if len(rows) < 2:
            raise ParameterError(f"{path}: need a header row and at least one data row")
        for lineno, row in enumerate(rows[1:], start=2):
            if len(row) != 2:
                raise ParameterError(f"{path}: row {lineno} must have two columns")
            try:
                xs.append(float(row[0]))
                cs.append(float(row[1]))
            except ValueError as exc:
                raise ParameterError(f"{path}: row {lineno}: {exc}") from None
        return cls.tabulated(xs, cs, eps, boundary_layers)

    # helpers ----------------------------------------------------------
    def resolve(self, params: ModelParams | None) -> "CutoffProfile":
        """Fill ``eps``/``alpha`` from ``params`` where unset."""
        eps, alpha = self.eps, self.alpha
        if eps is None and self.kind not in (KIND_CONSTANT,):
            if params is None:
                raise ParameterError("profile eps unset and no ModelParams given")
            eps = params.eps
        if alpha is None and self.kind == KIND_PIECEWISE:
            if params is None:
                raise ParameterError("profile alpha unset and no ModelParams given")
            alpha = params.alpha
        bdr = self.boundary.resolve(params) if self.boundary is not None else None
        if eps == self.eps and alpha == self.alpha and bdr is self.boundary:
            return self
        return replace(self, eps=eps, alpha=alpha, boundary=bdr)

    @property
    def is_smooth(self):
        """True when chibar is C^1 (needed by the spectral construction)."""
        if self.kind in (KIND_ARCTAN, KIND_CONSTANT):
            return True
        if self.kind == KIND_PIECEWISE:
            return False
        return False

    def statements(self):
        """Human-readable note on which hypotheses the profile satisfies."""
        if self.kind == KIND_PIECEWISE:
            return "non-smooth piecewise power: crossing-probability limits and hard-membrane convergence"
        if self.kind == KIND_ARCTAN:
            return "smooth, chibar not identically 1 off the layers: diffusion limit and stationary profile"
        if self.kind == KIND_QUADRATIC:
            return "model barrier chi**2 = (x/eps)**2: barrier-height heuristic"
        if self.kind == KIND_TABULATED:
            return "user table: stationary profile and simulations"
        return "constant: no barrier"


def _check_table(x, chi, eps):
    if x.ndim != 1 or x.shape != chi.shape or x.size < 3:
        raise ParameterError("table needs matching 1-D x and chi columns with >= 3 rows")
    if np.any(np.diff(x) <= 0):
        raise ParameterError("table x must be strictly increasing")
    if np.any(chi < 0) or np.any(chi > 1):
        raise ParameterError("table chi values must lie in [0, 1]")
    for pt in (0.0, 2 * eps, -2 * eps):
        if not np.any(np.isclose(x, pt, rtol=0, atol=1e-14)):
            raise ParameterError(f"table breakpoints must include {pt!r} (0 and +-2 eps)")
    if abs(chi[np.argmin(np.abs(x))]) > 0:
        raise ParameterError("table must have chi(0) = 0")
    if np.any(chi[np.abs(x) >= 2 * eps - 1e-14] != 1.0):
        raise ParameterError("table must have chi = 1 for |x| >= 2 eps")
    mirror = np.interp(-x, x, chi)
    inside = np.abs(x) <= min(-x[0], x[-1])
    if np.any(np.abs(mirror[inside] - chi[inside]) > 1e-12):
        raise ParameterError("table chi must be even")


def _pchip(prof: CutoffProfile):
    from scipy.interpolate import PchipInterpolator
    return PchipInterpolator(np.asarray(prof.table_x), np.asarray(prof.table_chi), extrapolate=False)


# ---------------------------------------------------------------------------
# single-factor evaluation (vectorized)

def _factor(prof: CutoffProfile, z, which="barrier"):
    """Return ``(chi, chi', chi**2, (chi**2)')`` of one cutoff factor at z.

    ``chi'`` is ``nan`` where it is singular; ``(chi**2)'`` is finite for
    ``alpha >= 1/2`` and set to 0 at z = 0 (principal value).
    """
    z = np.asarray(z, dtype=float)
    s = np.sign(z)
    az = np.abs(z)
    kind = prof.kind
    if which == "boundary" and kind == KIND_ARCTAN:
        w = 1.0 / ARCTAN_WALL_SCALE
    else:
        w = prof.eps
    if kind == KIND_PIECEWISE:
        eps, al = prof.eps, prof.alpha
        inner = az < eps
        mid = (az >= eps) & (az < 2 * eps)
        with np.errstate(divide="ignore", invalid="ignore"):
            v = az / eps
            u = np.where(mid, (2 * eps - az) / eps, 1.0)
            c = np.where(inner, 0.5 * v ** al, np.where(mid, 1.0 - 0.5 * u ** al, 1.0))
            d_in = 0.5 * al / eps * v ** (al - 1.0)
            d_mid = 0.5 * al / eps * u ** (al - 1.0)
            d = s * np.where(inner, d_in, np.where(mid, d_mid, 0.0))
            d2_in = 0.5 * al / eps * v ** (2 * al - 1.0)
            d2 = s * np.where(inner, d2_in, np.where(mid, 2 * c * d_mid, 0.0))
        d = np.where(az == 0, np.nan if al < 1 else 0.0, d)
        d2 = np.where(az == 0, 0.0, d2)
        return c, d, c * c, d2
    if kind == KIND_ARCTAN:
        t = np.arctan(z / w)
        c = (2 / np.pi) * np.abs(t)
        dt = 1.0 / (w * (1.0 + (z / w) ** 2))
        d = (2 / np.pi) * np.where(z >= 0, 1.0, -1.0) * dt
        return c, d, c * c, 2 * (2 / np.pi) ** 2 * t * dt
    if kind == KIND_QUADRATIC:
        inner = az < prof.eps
        c = np.where(inner, az / prof.eps, 1.0)
        d = np.where(inner, np.where(z >= 0, 1.0, -1.0) / prof.eps, 0.0)
        return c, d, c * c, np.where(inner, 2 * z / prof.eps ** 2, 0.0)
    if kind == KIND_TABULATED:
        pc = _pchip(prof)
        c = pc(z)
        d = pc.derivative()(z)
        out = np.isnan(c)
        c = np.where(out, 1.0, c)
        d = np.where(out, 0.0, d)
        clamp = (c <= 0.0) | (c >= 1.0)
        c = np.clip(c, 0.0, 1.0)
        d = np.where(clamp & (az > 0), 0.0, d)
        return c, d, c * c, 2 * c * d
    if kind == KIND_CONSTANT:
        c = np.full(z.shape, prof.value)
        zero = np.zeros(z.shape)
        return c, zero, c * c, zero
    raise ParameterError(kind)  # pragma: no cover


def _boundary_desc(prof: CutoffProfile):
    if prof.boundary is not None:
        return prof.boundary, "barrier"
    return prof, "boundary"


def _scalar_out(x, arr):
    return float(arr) if np.ndim(x) == 0 else arr


def _check_x(x):
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)):
        raise DomainError("x must be finite")
    return x


# ---------------------------------------------------------------------------
# public evaluators

def chi_eval(profile: CutoffProfile, params: ModelParams | None, x):
    """Barrier cutoff ``chi_eps(x)`` (no boundary factors).

    Parameters
    ----------
    profile : CutoffProfile
    params : ModelParams or None
        Supplies ``eps``/``alpha`` when the profile leaves them unset.
    x : float or array_like

    Returns
    -------
    float or ndarray
        Values in [0, 1]; exactly 0 at the origin.
    """
    prof = profile.resolve(params)
    xv = _check_x(x)
    return _scalar_out(x, _factor(prof, xv)[0])


def chi_deriv(profile: CutoffProfile, params: ModelParams | None, x):
    """Analytic derivative of ``chi_eps``.

    Raises
    ------
    DomainError
        At ``x = 0`` for the piecewise family with ``alpha < 1``, where the
        derivative is infinite.
    """
    prof = profile.resolve(params)
    xv = _check_x(x)
    d = _factor(prof, xv)[1]
    if np.any(np.isnan(d)):
        raise DomainError("chi' is singular at x = 0 for alpha < 1")
    return _scalar_out(x, d)


def chibar_eval(profile: CutoffProfile, params: ModelParams | None, x):
    """Full cutoff ``chibar(x)``, including wall layers when enabled."""
    return _scalar_out(x, _chibar_parts(profile.resolve(params), _check_x(x))[0])


def chibar_deriv(profile: CutoffProfile, params: ModelParams | None, x):
    """Derivative of ``chibar`` (with the convention ``chibar >= 0``).

    For the arctan example ``chibar = sqrt(chibar**2)`` has a corner at 0 and
    at each wall: the value returned there is the right derivative.
    """
    c, d = _chibar_parts(profile.resolve(params), _check_x(x))[:2]
    if np.any(np.isnan(d)):
        raise DomainError("chibar' is singular at this point")
    return _scalar_out(x, d)


def chibar2_eval(profile: CutoffProfile, params: ModelParams | None, x):
    """``chibar(x)**2``, the profile entering the diffusivity."""
    prof = profile.resolve(params)
    xv = _check_x(x)
    if prof.kind == KIND_ARCTAN and prof.boundary is None:
        return _scalar_out(x, arctan_example_eval(prof.eps, xv))
    return _scalar_out(x, _chibar_parts(prof, xv)[2])


def chibar2_deriv(profile: CutoffProfile, params: ModelParams | None, x):
    """``d/dx chibar(x)**2``; finite wherever ``alpha >= 1/2`` (0 at the kinks)."""
    return _scalar_out(x, _chibar_parts(profile.resolve(params), _check_x(x))[3])


def diffusivity(profile: CutoffProfile, params: ModelParams, x):
    """``a(x) = kappa_eps + kappa_T chibar(x)**2``."""
    return params.kappa_eps + params.kappa_T * chibar2_eval(profile, params, x)


def arctan_example_eval(eps, x):
    """Squared arctan example profile.

    ``((2/pi)**3 atan(x/eps) atan(1e4 (x - 1)) atan(1e4 (x + 1)))**2``
    """
    if not eps > 0:
        raise ParameterError("eps must be positive")
    x = np.asarray(x, dtype=float)
    g = (2 / np.pi) ** 3 * np.arctan(x / eps) * np.arctan(ARCTAN_WALL_SCALE * (x - 1)) \
        * np.arctan(ARCTAN_WALL_SCALE * (x + 1))
    return _scalar_out(x, g * g)


def _chibar_parts(prof: CutoffProfile, x):
    c, d, c2, d2 = _factor(prof, x, "barrier")
    if not prof.includes_boundary_layers or prof.kind == KIND_CONSTANT:
        return c, d, c2, d2
    bdesc, which = _boundary_desc(prof)
    l, dl, l2, dl2 = _factor(bdesc, x + 1.0, which)
    r, dr, r2, dr2 = _factor(bdesc, x - 1.0, which)
    val = c * l * r
    with np.errstate(invalid="ignore"):
        der = d * l * r + c * dl * r + c * l * dr
    sq = c2 * l2 * r2
    dsq = d2 * l2 * r2 + c2 * dl2 * r2 + c2 * l2 * dr2
    return val, der, sq, dsq


# ---------------------------------------------------------------------------
# kernel encoding

def encode_profile(profile: CutoffProfile, params: ModelParams | None):
    """Flatten a profile for the compiled kernels.

    Returns
    -------
    code : int
    p : ndarray, shape (8,)
        ``[eps, alpha, value, boundary_layers, bdr_code, bdr_eps, bdr_alpha, 0]``
    tx : ndarray
        PCHIP breakpoints (empty unless tabulated).
    tc : ndarray, shape (n-1, 4)
        PCHIP cubic coefficients per interval, highest power first.
    """
    prof = profile.resolve(params)
    code = CODE[prof.kind]
    bl = 1.0 if (prof.includes_boundary_layers and prof.kind != KIND_CONSTANT) else 0.0
    if prof.boundary is not None:
        b = prof.boundary
        bcode, beps, balpha = CODE[b.kind], b.eps, (b.alpha if b.alpha is not None else 1.0)
    elif prof.kind == KIND_ARCTAN:
        bcode, beps, balpha = CODE[KIND_ARCTAN], 1.0 / ARCTAN_WALL_SCALE, 1.0
    else:
        bcode, beps, balpha = code, prof.eps if prof.eps is not None else 1.0, \
            prof.alpha if prof.alpha is not None else 1.0
    p = np.array([prof.eps if prof.eps is not None else 1.0,
                  prof.alpha if prof.alpha is not None else 1.0,
                  prof.value, bl, float(bcode), beps, balpha, 0.0])
    if prof.kind == KIND_TABULATED:
        pc = _pchip(prof)
        tx = np.ascontiguousarray(pc.x, dtype=float)
        tc = np.ascontiguousarray(pc.c.T, dtype=float)
    else:
        tx = np.zeros(2)
        tc = np.zeros((1, 4))
    return code, p, tx, tc


def length_scale(profile: CutoffProfile, params: ModelParams | None):
    """Width of the barrier transition, used by step-size rules."""
    prof = profile.resolve(params)
    if prof.kind == KIND_CONSTANT:
        return 1.0
    return prof.eps
