"""Small-eps limits of the barrier crossing probability.

For the bare barrier cutoff ``chi`` (no wall layers) and ``r = kappa_T/kappa_eps``
the diffusion started at ``2 eps`` reaches 0 before ``4 eps`` with probability

    pbar = int_{2eps}^{4eps} g / int_0^{4eps} g,    g = 1 / (1 + r chi**2).

The integrals only depend on ``r`` and ``alpha`` after the substitution
``x = eps u``.  With ``eta**(2 alpha) = r`` the ``[0, eps]`` piece is
``(1/eta) int_0^eta dv / (1 + v**(2 alpha)/4)``, which drives every regime:

* ``alpha > 1/2`` and ``r ~ (K eps)**(2 alpha/(1 - 2 alpha))``: ``pbar/eps`` has
  a finite positive limit, a hard membrane;
* ``alpha = 1/2`` and ``log r ~ 1/(K eps)``: the same, logarithmically;
* slower divergence of ``r``: ``pbar/eps -> inf``, Brownian motion; faster:
  ``pbar/eps -> 0``, a non-permeable membrane;
* ``alpha < 1/2``: ``pbar`` itself tends to a constant in (0, 1).

Huge ratios enter through ``log r`` so that schedules such as
``log r = 1/(K eps)`` stay representable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import quadrature as quad
from .coefficients import (KIND_PIECEWISE, CutoffProfile, ModelParams, ParameterError,
                           chi_eval)

HARD = "HardMembrane"
BROWNIAN = "PureBrownian"
NONPERMEABLE = "NonPermeable"
SKEW = "SkewLimit"

SPLIT_V = 1.0e4
SLOPE_TOL = 0.01
RTOL = 1e-12


class RegimeError(ParameterError):
    """Regime outside the supported classification."""


# ---------------------------------------------------------------------------
# schedules

@dataclass(frozen=True)
class Schedule:
    """A law ``eps -> kappa_T/kappa_eps`` given through its logarithm."""

    log_ratio_fn: object
    label: str = "custom"

    def log_ratio(self, eps):
        return float(self.log_ratio_fn(eps))

    def ratio(self, eps):
        return math.exp(min(self.log_ratio(eps), 700.0))

    @classmethod
    def from_ratio(cls, fn, label="custom"):
        return cls(lambda e: math.log(fn(e)), label)

    @classmethod
    def power(cls, coef, power):
        """``ratio = coef * eps**power``."""
        return cls(lambda e: math.log(coef) + power * math.log(e), f"{coef}*eps^{power}")

    @classmethod
    def critical(cls, alpha, K):
        """``ratio = (K eps)**(2 alpha/(1 - 2 alpha))``, the hard-membrane rate for alpha > 1/2."""
        if alpha == 0.5:
            return cls.log_critical(K)
        p = 2 * alpha / (1 - 2 * alpha)
        return cls(lambda e: p * math.log(K * e), f"(K eps)^{p:g}")

    @classmethod
    def log_critical(cls, K):
        """``log ratio = 1/(K eps)``, the hard-membrane rate for alpha = 1/2."""
        return cls(lambda e: 1.0 / (K * e), "log r = 1/(K eps)")


def _as_schedule(s):
    if isinstance(s, Schedule):
        return s
    if callable(s):
        return Schedule.from_ratio(s)
    raise ParameterError("schedule must be a Schedule or a callable eps -> ratio")


# ---------------------------------------------------------------------------
# quadratures

def _log_ratio(params: ModelParams, log_ratio):
    if log_ratio is not None:
        return float(log_ratio)
    if params.kappa_T == 0:
        return -math.inf
    if params.kappa_eps == 0:
        raise ParameterError("kappa_eps = 0 gives an infinite ratio; pass log_ratio")
    return math.log(params.kappa_T) - math.log(params.kappa_eps)


def _piecewise_parts(alpha, L, rtol=RTOL):
    """Scaled pieces ``(A, B, C)`` with ``pbar = C / (A + B + C)``.

    For ``L = log r > 0`` all three are multiplied by ``r``:
    ``A = int_0^1 dv / (1/r + v**(2a)/4)`` via ``v = exp(-t)``,
    ``B = int_0^1 du / (1/r + (1 - u**a/2)**2)``, ``C = 2 / (1 + 1/r)``.
    """
    if L == -math.inf:
        return 1.0, 1.0, 2.0
    if L <= 0.0:
        r = math.exp(L)
        A = quad.integrate(lambda v: 1.0 / (1.0 + 0.25 * r * v ** (2 * alpha)), 0.0, 1.0,
                           focus=(0.0,), rtol=rtol)
        B = quad.integrate(lambda u: 1.0 / (1.0 + r * (1.0 - 0.5 * u ** alpha) ** 2), 0.0, 1.0,
                           focus=(0.0,), rtol=rtol)
        return A, B, 2.0 / (1.0 + r)
    ir = math.exp(-L)
    c = 1.0 - 2.0 * alpha

    def fa(t):
        return 1.0 / (np.exp(t - L) + 0.25 * np.exp(c * t))

    # the two terms of the denominator cross at t* = (L - log 4)/(2a); beyond it
    # the integrand decays like exp(L - t)
    ts = max((L - math.log(4.0)) / (2 * alpha), 0.0)
    hi = ts + 60.0
    pts = [k for k in (ts, L) if 0 < k < hi]
    pts += list(np.linspace(0.0, hi, 65)[1:-1])
    A = quad.integrate(fa, 0.0, hi, points=tuple(pts), rtol=rtol)
    B = quad.integrate(lambda u: 1.0 / (ir + (1.0 - 0.5 * u ** alpha) ** 2), 0.0, 1.0,
                       focus=(0.0,), rtol=rtol)
    return A, B, 2.0 / (1.0 + ir)


def _generic_p(prof: CutoffProfile, params, L, sign, rtol=RTOL):
    eps = prof.eps
    bare = _bare(prof)
    r = math.exp(L) if L != -math.inf else 0.0
    if not math.isfinite(r):
        raise ParameterError("ratio overflows; only the piecewise profile supports log schedules")

    def g(u):
        c = np.asarray(chi_eval(bare, params, sign * eps * u), dtype=float)
        return 1.0 / (1.0 + r * c * c)

    focus = (0.0,)
    pts = (1.0, 2.0)
    num = quad.integrate(g, 2.0, 4.0, points=(), rtol=rtol)
    den = quad.integrate(g, 0.0, 4.0, focus=focus, points=pts, rtol=rtol)
    return num / den


def _bare(prof: CutoffProfile):
    if prof.includes_boundary_layers:
        from dataclasses import replace
        return replace(prof, includes_boundary_layers=False)
    return prof


def p_plus_quadrature(params: ModelParams, profile: CutoffProfile | None = None, log_ratio=None,
                      rtol=RTOL):
    """Probability ``pbar_plus`` of reaching 0 before ``4 eps`` from ``2 eps``.

    Parameters
    ----------
    params : ModelParams
        ``eps``, ``alpha`` and the diffusivities.
    profile : CutoffProfile, optional
        Barrier cutoff; default piecewise power.  Wall layers are ignored.
    log_ratio : float, optional
        ``log(kappa_T/kappa_eps)`` overriding ``params``; lets schedules with
        ratios beyond floating range be evaluated.

    Returns
    -------
    float
        In (0, 1); 1/2 when ``kappa_T = 0``.
    """
    prof = (profile or CutoffProfile.piecewise_power()).resolve(params)
    L = _log_ratio(params, log_ratio)
    if prof.kind == KIND_PIECEWISE:
        A, B, C = _piecewise_parts(prof.alpha, L, rtol)
        return C / (A + B + C)
    return _generic_p(prof, params, L, 1.0, rtol)


def p_minus_quadrature(params: ModelParams, profile: CutoffProfile | None = None, log_ratio=None,
                       rtol=RTOL):
    """Mirror of :func:`p_plus_quadrature` on ``[-4 eps, 0]``.

    Evaluated by direct quadrature of the profile at negative x, so for
    even profiles it doubles as an independent check of ``p_plus``.
    """
    prof = (profile or CutoffProfile.piecewise_power()).resolve(params)
    L = _log_ratio(params, log_ratio)
    if prof.kind == KIND_PIECEWISE and L > 700.0:
        # even family: the mirrored integrals are the same functions of u
        A, B, C = _piecewise_parts(prof.alpha, L, rtol)
        return C / (A + B + C)
    return _generic_p(prof, params, L, -1.0, rtol)


def key_identity_terms(alpha, ratio, rtol=RTOL):
    """The three denominator terms of ``pbar`` in the ``v = eta u`` variables.

    Returns ``(t1, t2, t3, num)`` with

        t1 = (1/eta) int_0^eta dv / (1 + v**(2 alpha)/4),
        t2 = int_0^1 du / (1 + eta**(2 alpha) (1 - u**alpha/2)**2),
        t3 = num = 2 / (1 + eta**(2 alpha)),

    so that ``pbar = num / (t1 + t2 + t3)``.  This route integrates over
    ``v`` directly and is independent of :func:`p_plus_quadrature`.
    """
    if not (ratio > 0 and math.isfinite(ratio)):
        raise ParameterError("ratio must be positive and finite")
    eta = ratio ** (1.0 / (2 * alpha))
    f = lambda v: 1.0 / (1.0 + 0.25 * v ** (2 * alpha))
    t1 = quad.integrate(f, 0.0, eta, focus=(0.0,), points=tuple(p for p in (1.0, 2.0, 10.0) if p < eta),
                        rtol=rtol) / eta
    t2 = quad.integrate(lambda u: 1.0 / (1.0 + ratio * (1.0 - 0.5 * u ** alpha) ** 2), 0.0, 1.0,
                        focus=(0.0,), rtol=rtol)
    num = 2.0 / (1.0 + ratio)
    return t1, t2, num, num


def p_plus_decomposed(alpha, ratio, rtol=RTOL):
    t1, t2, t3, num = key_identity_terms(alpha, ratio, rtol)
    return num / (t1 + t2 + t3)


# ---------------------------------------------------------------------------
# limits

def _improper_integral(alpha):
    """``int_0^inf dv / (1 + v**(2 alpha)/4)`` for alpha > 1/2."""
    V = SPLIT_V
    f = lambda v: 1.0 / (1.0 + 0.25 * v ** (2 * alpha))
    head = quad.integrate(f, 0.0, V, focus=(0.0,), points=(1.0, 2.0, 10.0, 100.0, 1000.0), rtol=1e-13)
    # 1/(1 + w/4) = sum_k (-1)^k 4^(k+1) w^-(k+1) for w = v^(2a) > 4
    tail = 0.0
    for k in range(4):
        e = 2 * alpha * (k + 1) - 1
        tail += (-1) ** k * 4.0 ** (k + 1) * V ** (-e) / e
    return head + tail


def beta_limit(alpha, K):
    """Stated hard-membrane permeability.

    ``K / int_0^inf dv/(1 + v**(2 alpha)/4)`` for ``alpha > 1/2`` and ``K/4``
    for ``alpha = 1/2``.

    Raises
    ------
    RegimeError
        For ``alpha < 1/2``, where no hard-membrane limit exists; use
        :func:`classify_regime`.
    """
    if not K > 0:
        raise ParameterError("K must be positive")
    if alpha < 0.5:
        raise RegimeError("alpha < 1/2 has no hard-membrane limit; see classify_regime")
    if alpha == 0.5:
        return K / 4.0
    return K / _improper_integral(alpha)


def p_limit_subcritical(alpha, rtol=RTOL):
    """``lim pbar`` for ``alpha < 1/2`` and any divergent ratio.

    ``r A -> 4/(1 - 2 alpha)``, ``r B -> int_0^1 du/(1 - u**alpha/2)**2`` and
    ``r C -> 2``, so the limit is ``2 / (4/(1-2 alpha) + I + 2)``.
    """
    if not 0 < alpha < 0.5:
        raise ParameterError("need 0 < alpha < 1/2")
    I = quad.integrate(lambda u: 1.0 / (1.0 - 0.5 * u ** alpha) ** 2, 0.0, 1.0, focus=(0.0,), rtol=rtol)
    return 2.0 / (4.0 / (1.0 - 2.0 * alpha) + I + 2.0)


def p_limit_stated(alpha):
    """The closed form ``(1 - 2 alpha)/(7 - 6 alpha)`` quoted for alpha < 1/2."""
    if not 0 < alpha < 0.5:
        raise ParameterError("need 0 < alpha < 1/2")
    return (1.0 - 2.0 * alpha) / (7.0 - 6.0 * alpha)


def skew_gamma(p_minus, p_plus):
    """Skewness ``(p_minus - p_plus)/(p_minus + p_plus)``; 0 for equal arguments."""
    if p_minus < 0 or p_plus < 0 or p_minus + p_plus <= 0:
        raise ParameterError("need nonnegative probabilities with a positive sum")
    return (p_minus - p_plus) / (p_minus + p_plus)


# ---------------------------------------------------------------------------
# regimes

@dataclass
class RegimeResult:
    """Classification plus the numbers it rests on.

    Exactly one of ``beta_plus/beta_minus`` (HardMembrane) or ``gamma``
    (SkewLimit) is set.  ``evidence`` holds the fitted slope, the critical
    slope, the tolerance and the last ``pbar/eps`` values.
    """

    regime: str
    beta_plus: float | None = None
    beta_minus: float | None = None
    gamma: float | None = None
    eta: float | None = None
    evidence: dict = field(default_factory=dict)

    def to_dict(self):
        return dict(regime=self.regime, beta_plus=self.beta_plus, beta_minus=self.beta_minus,
                    gamma=self.gamma, eta=self.eta, **self.evidence)


FIT_EPS = tuple(np.logspace(-6, -3, 7))


def classify_regime(alpha, schedule, profile: CutoffProfile | None = None, fit_eps=FIT_EPS,
                    tol=SLOPE_TOL):
    """Limit regime of the barrier for a divergent ratio schedule.

    Parameters
    ----------
    alpha : float
        Cutoff exponent.
    schedule : Schedule or callable
        ``eps -> kappa_T/kappa_eps``.
    fit_eps : sequence of float
        Points for the log-log slope fit.
    tol : float
        Relative slope tolerance for matching the critical rate.

    Notes
    -----
    For ``alpha > 1/2`` the slope of ``log r`` against ``log eps`` is compared
    with ``2 alpha/(1 - 2 alpha)``; at ``alpha = 1/2`` the slope of
    ``log log r`` is compared with -1.  For ``alpha < 1/2`` ``pbar`` and its
    mirror tend to constants and the result is a skew limit whose skewness is
    0 (standard Brownian motion) for even profiles.
    """
    if not alpha > 0:
        raise ParameterError("alpha must be positive")
    sch = _as_schedule(schedule)
    es = np.asarray(fit_eps, dtype=float)
    le = np.log(es)
    lr = np.array([sch.log_ratio(e) for e in es])
    if not (np.all(np.isfinite(lr)) and lr[0] > lr[-1] and lr[0] > 0):
        raise RegimeError("schedule must diverge as eps -> 0 (kappa_T/kappa_eps -> inf)")
    eps_min = float(es.min())
    L_min = float(lr[np.argmin(es)])
    eta = math.exp(min(L_min / (2 * alpha), 700.0))
    ev = dict(tolerance=tol, schedule=sch.label, fit_eps=[float(e) for e in es])
    if alpha < 0.5:
        prof = profile or CutoffProfile.piecewise_power(alpha=alpha)
        P = ModelParams(eps=min(eps_min, 0.1), kappa_eps=1.0, kappa_T=1.0, alpha=alpha)
        pp = p_plus_quadrature(P, prof, log_ratio=L_min)
        pm = p_minus_quadrature(P, prof, log_ratio=L_min)
        g = skew_gamma(pm, pp)
        ev.update(p_plus=pp, p_minus=pm, p_limit=p_limit_subcritical(alpha),
                  symbolic="Brownian motion when gamma = 0")
        return RegimeResult(SKEW, gamma=g, eta=eta, evidence=ev)
    if alpha == 0.5:
        if np.any(lr <= 0):
            raise RegimeError("log-schedule fit needs ratio > 1")
        y = np.log(lr)
        crit = -1.0
    else:
        y = lr
        crit = 2 * alpha / (1 - 2 * alpha)
    slope, icpt = np.polyfit(le, y, 1)
    ev.update(slope=float(slope), critical_slope=crit)
    rows = []
    P = ModelParams(eps=min(eps_min, 0.1), kappa_eps=1.0, kappa_T=1.0, alpha=alpha)
    for e, L in zip(es, lr):
        Pe = P.with_(eps=min(float(e), 0.1))
        rows.append(p_plus_quadrature(Pe, CutoffProfile.piecewise_power(), log_ratio=float(L)) / e)
    ev["pbar_over_eps"] = rows
    if abs(slope - crit) <= tol * abs(crit):
        # log r = crit (log K + log eps), or log log r = -log K - log eps at alpha = 1/2
        K = math.exp(icpt / crit) if alpha > 0.5 else math.exp(-icpt)
        b = beta_limit(alpha, K)
        ev["K_fit"] = K
        return RegimeResult(HARD, beta_plus=b, beta_minus=b, eta=eta, evidence=ev)
    # log r more negative-sloped than critical means faster divergence
    if slope < crit:
        return RegimeResult(NONPERMEABLE, eta=eta, evidence=ev)
    return RegimeResult(BROWNIAN, eta=eta, evidence=ev)


@dataclass
class KeyIdentityRow:
    eps: float
    log_ratio: float
    p_bar: float
    p_over_eps: float


def key_identity_curve(params_list=None, *, alpha=None, K=None, eps_list=None, schedule=None,
                       profile: CutoffProfile | None = None):
    """Table of ``(eps, pbar/eps)`` along decreasing eps.

    Either pass ModelParams rows, or ``alpha``/``eps_list`` with a schedule
    (default: the critical schedule for ``K``).
    """
    rows = []
    if params_list is not None:
        prev = math.inf
        for P in params_list:
            if not P.eps < prev:
                raise ParameterError("eps must decrease along the list")
            prev = P.eps
            L = _log_ratio(P, None)
            pb = p_plus_quadrature(P, profile)
            rows.append(KeyIdentityRow(P.eps, L, pb, pb / P.eps))
        return rows
    if alpha is None or eps_list is None:
        raise ParameterError("give params_list or alpha and eps_list")
    sch = _as_schedule(schedule) if schedule is not None else Schedule.critical(alpha, 1.0 if K is None else K)
    es = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(es, es[1:])):
        raise ParameterError("eps must decrease along the list")
    prof = profile or CutoffProfile.piecewise_power()
    for e in es:
        P = ModelParams(eps=e, kappa_eps=1.0, kappa_T=1.0, alpha=alpha, K=1.0 if K is None else K)
        L = sch.log_ratio(e)
        pb = p_plus_quadrature(P, prof, log_ratio=L)
        rows.append(KeyIdentityRow(e, L, pb, pb / e))
    return rows
