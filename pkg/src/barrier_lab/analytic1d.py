"""Stationary solution of the reduced one-dimensional heat problem.

With ``a(x) = kappa_eps + kappa_T chibar(x)**2`` the steady temperature with
``T(-1) = T_plus`` and ``T(1) = 0`` carries the constant flux

    phi = T_plus / int_{-1}^{1} dx / a(x),
    T(x) = T_plus - phi * int_{-1}^{x} dx' / a(x').

All integrals go through :mod:`barrier_lab.quadrature` with a mesh graded
toward the barrier and the walls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import quadrature as quad
from .coefficients import (
    KIND_CONSTANT, KIND_PIECEWISE, KIND_QUADRATIC, KIND_TABULATED,
    CutoffProfile, ModelParams, ParameterError, diffusivity,
)

RTOL = 1e-10


@dataclass
class StationaryProfile:
    """Steady temperature on a grid.

    Attributes
    ----------
    xs, temps : ndarray
    flux : float
        Heat flux ``phi`` (positive, toward the cold wall).
    theta : float
        Model-barrier integral ``Theta_eps`` for the same parameters.
    t_star : float
        ``T(-eps)`` from quadrature.
    t_star_formula : float
        The asymptotic estimate ``(1+Theta)/(2+Theta) T_plus``.
    c_eff : float
        Effective conductivity ``2 K kappa_T / (2K + pi)``.
    """

    xs: np.ndarray
    temps: np.ndarray
    flux: float
    theta: float
    t_star: float
    t_star_formula: float
    c_eff: float


def breakpoints(profile: CutoffProfile, params: ModelParams):
    """Kinks and focus points of ``1/a`` for the quadrature mesh."""
    prof = profile.resolve(params)
    if prof.kind == KIND_CONSTANT:
        return (), ()
    eps = prof.eps
    pts = []
    if prof.kind in (KIND_PIECEWISE, KIND_TABULATED, KIND_QUADRATIC):
        pts += [-2 * eps, -eps, eps, 2 * eps]
        if prof.includes_boundary_layers:
            pts += [-1 + eps, -1 + 2 * eps, 1 - eps, 1 - 2 * eps]
    if prof.kind == KIND_TABULATED:
        tx = np.asarray(prof.table_x)
        pts += list(tx[np.abs(tx) < 1])
    focus = [0.0]
    if prof.includes_boundary_layers:
        focus += [-1.0, 1.0]
    return tuple(focus), tuple(pts)


def _inv_a(profile, params):
    def f(x):
        return 1.0 / diffusivity(profile, params, x)
    return f


def _check_positive_a(params, profile):
    prof = profile.resolve(params)
    if params.kappa_eps > 0:
        return
    if prof.kind == KIND_CONSTANT and prof.value > 0:
        return
    raise ParameterError("kappa_eps = 0 makes 1/a non-integrable where chibar vanishes")


def resistance(params: ModelParams, profile: CutoffProfile, x1=-1.0, x2=1.0, rtol=RTOL):
    """``int_{x1}^{x2} dx / a(x)``."""
    _check_positive_a(params, profile)
    focus, pts = breakpoints(profile, params)
    return quad.integrate(_inv_a(profile, params), x1, x2, focus=focus, points=pts, rtol=rtol)


def scale_function(params: ModelParams, profile: CutoffProfile, x, rtol=RTOL):
    """Scale function ``s(x) = int_0^x kappa_eps / a(y) dy``.

    Parameters
    ----------
    params, profile
        Model parameters; ``kappa_eps`` must be positive.
    x : float or array_like
        Points in [-1, 1].

    Returns
    -------
    float or ndarray
        Strictly increasing in x with ``s(0) = 0``.
    """
    if not params.kappa_eps > 0:
        raise ParameterError("scale function needs kappa_eps > 0")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(np.abs(xs) > 1):
        raise ParameterError("x must lie in [-1, 1]")
    out = np.array([params.kappa_eps * resistance(params, profile, 0.0, xi, rtol) for xi in xs])
    return float(out[0]) if np.ndim(x) == 0 else out


def flux(params: ModelParams, profile: CutoffProfile, rtol=RTOL):
    """Stationary heat flux ``T_plus / int_{-1}^{1} dx/a``."""
    return params.T_plus / resistance(params, profile, -1.0, 1.0, rtol)


def stationary_profile(params: ModelParams, profile: CutoffProfile, grid, rtol=RTOL):
    """Steady temperature on ``grid``.

    The grid must be sorted and run from -1 to 1.  Temperatures are formed as
    ``T_plus * (1 - C(x)/C(1))`` with C the running resistance, so the end
    values are exact and the profile is monotone by construction.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise ParameterError("grid must be strictly increasing with at least two points")
    if grid[0] != -1.0 or grid[-1] != 1.0:
        raise ParameterError("grid must contain both endpoints -1 and 1")
    _check_positive_a(params, profile)
    focus, pts = breakpoints(profile, params)
    run, _ = quad.cumulative(_inv_a(profile, params), grid, focus=focus, points=pts, rtol=rtol)
    total = run[-1]
    temps = params.T_plus * (1.0 - run / total)
    temps[0] = params.T_plus
    temps[-1] = 0.0
    phi = params.T_plus / total
    t_star = temperature_at(params, profile, -params.eps, rtol)
    theta = theta_epsilon(params)
    return StationaryProfile(grid, temps, phi, theta, t_star,
                             barrier_height(params), effective_conductivity(params))


def temperature_at(params: ModelParams, profile: CutoffProfile, x, rtol=RTOL):
    """``T(x)`` from two resistance quadratures."""
    left = resistance(params, profile, -1.0, x, rtol)
    right = resistance(params, profile, x, 1.0, rtol)
    return params.T_plus * right / (left + right)


def temperature_gradient(params: ModelParams, profile: CutoffProfile, x, phi=None):
    """Closed-form ``T'(x) = -phi / a(x)``."""
    if phi is None:
        phi = flux(params, profile)
    return -phi / diffusivity(profile, params, x)


def theta_epsilon(params: ModelParams | None = None, *, eps=None, ratio=None):
    """Model-barrier integral ``Theta = 2 eps sqrt(r) atan(sqrt(r))``.

    ``r = kappa_T / kappa_eps``.  Either pass ``params`` or both keywords.

    Examples
    --------
    >>> round(theta_epsilon(eps=1.0, ratio=1.0), 12) == round(math.pi / 2, 12)
    True
    """
    if params is not None:
        eps, ratio = params.eps, params.ratio
    if eps is None or ratio is None:
        raise ParameterError("theta_epsilon needs params or eps and ratio")
    if not eps > 0 or not ratio >= 0:
        raise ParameterError("eps must be positive and ratio nonnegative")
    if math.isinf(ratio):
        return math.inf
    q = math.sqrt(ratio)
    return 2.0 * eps * q * math.atan(q)


def theta_quadrature(params: ModelParams, rtol=1e-12):
    """``int_{-eps}^{eps} kappa_T dx / (kappa_eps + kappa_T (x/eps)**2)`` numerically."""
    eps, ke, kt = params.eps, params.kappa_eps, params.kappa_T
    f = lambda x: kt / (ke + kt * (x / eps) ** 2)
    return quad.integrate(f, -eps, eps, focus=(0.0,), rtol=rtol)


def barrier_height(params: ModelParams, use_scaling_law=False):
    """Heuristic barrier-left temperature ``T_*``.

    ``(1 + Theta)/(2 + Theta) * T_plus`` with Theta from the parameters, or the
    scaling-law limit ``(K + pi)/(2K + pi) * T_plus`` when ``use_scaling_law``.
    """
    if use_scaling_law:
        return barrier_height_scaling(params.K, params.T_plus)
    th = theta_epsilon(params)
    if math.isinf(th):
        return params.T_plus
    return (1.0 + th) / (2.0 + th) * params.T_plus


def barrier_height_scaling(K, T_plus=2.0):
    """``(K + pi)/(2K + pi) * T_plus``; ``K = inf`` gives ``T_plus/2``."""
    if math.isinf(K):
        return 0.5 * T_plus
    if K == 0:
        return float(T_plus)
    return (K + math.pi) / (2 * K + math.pi) * T_plus


def effective_conductivity(params: ModelParams | None = None, *, K=None, kappa_T=None):
    """``c = 2 K kappa_T / (2K + pi)``, strictly below ``kappa_T``."""
    if params is not None:
        K, kappa_T = params.K, params.kappa_T
    if math.isinf(K):
        return float(kappa_T)
    return 2.0 * K * kappa_T / (2.0 * K + math.pi)


def link_conductivity(v, beta):
    """``v beta / (2 beta + 1)``, the conductivity written through the permeability."""
    return v * beta / (2.0 * beta + 1.0)
