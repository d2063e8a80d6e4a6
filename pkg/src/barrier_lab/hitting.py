"""Closed-form hitting probabilities for Brownian motion with a hard membrane.

Conventions: the membrane sits at 0, ``beta_plus`` is the rate of the
exponential local-time clock that lets the process leave the positive side,
``beta_minus`` the one for the negative side.  ``"+0"`` and ``"-0"`` are the
two distinct starting states at the membrane.

All expressions are written over their common denominator
``1 - a beta_minus + b beta_plus`` so that large permeabilities do not cancel
catastrophically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coefficients import ParameterError

PLUS0 = "+0"
MINUS0 = "-0"


class AmbiguousStart(ParameterError):
    """Start exactly at the membrane without a side."""


@dataclass(frozen=True)
class MembraneParams:
    """Permeabilities of the two faces; 0 makes that face reflecting."""

    beta_plus: float
    beta_minus: float

    def __post_init__(self):
        for name in ("beta_plus", "beta_minus"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float, np.floating, np.integer)) and math.isfinite(v) and v >= 0):
                raise ParameterError(f"{name} must be finite and >= 0, got {v!r}")

    @classmethod
    def symmetric(cls, beta):
        return cls(beta, beta)


def parse_start(start):
    """Normalize a start spec to ``(x, side)`` with side in {+1, -1}.

    Floats other than 0 carry their own sign; ``"+0"`` / ``"-0"`` select a
    side at the membrane; a bare 0 is ambiguous.
    """
    if isinstance(start, str):
        s = start.strip()
        if s in ("+0", "0+", "+0.0"):
            return 0.0, 1
        if s in ("-0", "0-", "-0.0"):
            return 0.0, -1
        try:
            start = float(s)
        except ValueError:
            raise ParameterError(f"cannot parse start {start!r}; use a number, +0 or -0") from None
    if isinstance(start, tuple):
        x, side = start
        if side not in (1, -1):
            raise ParameterError("side must be +1 or -1")
        if x != 0 and np.sign(x) != side:
            raise ParameterError("side must agree with the sign of a nonzero start")
        return float(x), int(side)
    x = float(start)
    if x == 0.0:
        raise AmbiguousStart("start at 0 needs a side: use '+0' or '-0'")
    return x, (1 if x > 0 else -1)


@dataclass(frozen=True)
class HittingQuery:
    a: float
    b: float
    start: object
    mp: MembraneParams

    def __post_init__(self):
        if not (self.a < 0 < self.b):
            raise ParameterError(f"need a < 0 < b, got a={self.a}, b={self.b}")
        x, _ = parse_start(self.start)
        if not self.a <= x <= self.b:
            raise ParameterError(f"start {x} outside [a, b]")


def _p0(a, b, bp, bm):
    """``(P_{0+}, P_{0-})`` of hitting a before b."""
    den = 1.0 - a * bm + b * bp
    return b * bp / den, (b * bp + 1.0) / den


def _p0_complement(a, b, bp, bm):
    den = 1.0 - a * bm + b * bp
    return (1.0 - a * bm) / den, -a * bm / den


def hit_prob_membrane(q: HittingQuery):
    """``P(tau_a < tau_b)`` from the query's start.

    On each side the process is a plain Brownian motion until it reaches 0,
    so the value interpolates linearly between the level and the
    appropriate membrane state.
    """
    x, side = parse_start(q.start)
    a, b = q.a, q.b
    p_plus, p_minus = _p0(a, b, q.mp.beta_plus, q.mp.beta_minus)
    if x == 0.0:
        return p_plus if side > 0 else p_minus
    if x < 0:
        return x / a + (a - x) / a * p_minus
    return (b - x) / b * p_plus


def hit_prob_membrane_complement(q: HittingQuery):
    """``P(tau_b < tau_a)`` evaluated from its own closed form."""
    x, side = parse_start(q.start)
    a, b = q.a, q.b
    c_plus, c_minus = _p0_complement(a, b, q.mp.beta_plus, q.mp.beta_minus)
    if x == 0.0:
        return c_plus if side > 0 else c_minus
    if x < 0:
        return (a - x) / a * c_minus
    return x / b + (b - x) / b * c_plus


def hit_prob_bm(x, x1, x2):
    """Standard Brownian motion: ``P_x(tau_{x1} < tau_{x2}) = (x2 - x)/(x2 - x1)``."""
    if not x1 <= x <= x2:
        raise ParameterError("need x1 <= x <= x2")
    return (x2 - x) / (x2 - x1)


def hit_prob_elastic(b, beta):
    """Probability that elastic Brownian motion from 0 hits ``b`` before being killed."""
    if not b > 0:
        raise ParameterError("b must be positive")
    if not beta >= 0:
        raise ParameterError("beta must be >= 0")
    return 1.0 / (1.0 + b * beta)


def exit_left_limit(x, beta):
    """Limit probability of leaving [-1, 1] through -1, symmetric membrane.

    ``(1 + (1-x) beta)/(2 beta + 1)`` on [-1, 0) and ``(1-x) beta/(2 beta + 1)``
    on (0, 1]; ``x`` may also be ``"+0"`` or ``"-0"``.
    """
    xv, side = parse_start(x)
    if abs(xv) > 1:
        raise ParameterError("x must lie in [-1, 1]")
    if not beta >= 0:
        raise ParameterError("beta must be >= 0")
    den = 2.0 * beta + 1.0
    if side < 0:
        return (1.0 + (1.0 - xv) * beta) / den
    return (1.0 - xv) * beta / den


REFLECTED_STATES = ("(-1)+", "0-", "0+", "1-")


def reflected_system(beta, walls="reflecting", wall_beta=None):
    """Matrix and right-hand side of the four-state system.

    Unknowns are ``P(sigma_{-1} < sigma_1)`` started from ``(-1)+, 0-, 0+, 1-``.
    An excursion across a unit interval against an Exp(rate) local-time clock
    at its starting end survives with probability ``1/(1 + rate)``.  With
    ``q = beta/(1+beta)``, ``p = 1/(1+beta)`` for the membrane and ``qw, pw``
    the same for the walls:

        P(-1)+ = qw + pw P0-
        P0-    = p P(-1)+ + q P0+
        P0+    = q P0- + p P1-
        P1-    = pw P0+

    ``wall_beta`` defaults to ``beta``.  ``walls="absorbing"`` replaces the
    wall rows by ``P(-1)+ = 1`` and ``P1- = 0``.
    """
    wb = beta if wall_beta is None else wall_beta
    for v in (beta, wb):
        if not (math.isfinite(v) and v >= 0):
            raise ParameterError("beta and wall_beta must be finite and >= 0")
    q, p = beta / (1.0 + beta), 1.0 / (1.0 + beta)
    qw, pw = wb / (1.0 + wb), 1.0 / (1.0 + wb)
    A = np.eye(4)
    rhs = np.zeros(4)
    if walls == "reflecting":
        A[0, 1] = -pw
        rhs[0] = qw
        A[3, 2] = -pw
    elif walls == "absorbing":
        rhs[0] = 1.0
    else:
        raise ParameterError("walls must be 'reflecting' or 'absorbing'")
    A[1, 0] = -p
    A[1, 2] = -q
    A[2, 1] = -q
    A[2, 3] = -p
    return A, rhs


def solve_reflected_system(beta, walls="reflecting", wall_beta=None):
    """Solved state values as a dict keyed by ``REFLECTED_STATES``.

    An impermeable membrane (``beta == 0``) splits the domain: the negative
    half can only end at -1 and the positive half only at 1, so the values
    are 1, 1, 0, 0 whatever the wall rate.  Reflecting walls that never
    absorb (``wall_beta == 0`` with ``beta > 0``) leave the event undefined.
    """
    wb = beta if wall_beta is None else wall_beta
    if beta == 0 and walls == "reflecting":
        return dict(zip(REFLECTED_STATES, (1.0, 1.0, 0.0, 0.0)))
    A, rhs = reflected_system(beta, walls, wall_beta)
    det = np.linalg.det(A)
    if not abs(det) > 1e-14:
        raise ArithmeticError(
            f"reflected system is singular (det={det}); wall_beta={wb} never absorbs")
    sol = np.linalg.solve(A, rhs)
    return dict(zip(REFLECTED_STATES, (float(v) for v in sol)))


def hit_prob_reflected_system(mp: MembraneParams, start, walls="reflecting", wall_beta=None):
    """``P(sigma_{-1} < sigma_1)`` for the membrane with elastic walls at -1, 1.

    ``start`` is one of ``REFLECTED_STATES`` or a point of (-1, 0) or (0, 1);
    interiors interpolate linearly between the neighbouring states.
    """
    if mp.beta_plus != mp.beta_minus:
        raise ParameterError("the reflected system assumes beta_plus == beta_minus")
    sol = solve_reflected_system(mp.beta_plus, walls, wall_beta)
    if isinstance(start, str) and start in REFLECTED_STATES:
        return sol[start]
    x, side = parse_start(start)
    if x == 0.0:
        return sol["0+"] if side > 0 else sol["0-"]
    if x == -1.0:
        return sol["(-1)+"]
    if x == 1.0:
        return sol["1-"]
    if -1 < x < 0:
        return -x * sol["(-1)+"] + (1 + x) * sol["0-"]
    if 0 < x < 1:
        return (1 - x) * sol["0+"] + x * sol["1-"]
    raise ParameterError("start must lie in [-1, 1]")
