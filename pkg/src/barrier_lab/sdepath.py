"""Pre-limit diffusions, their time change and Feynman-Kac estimates.

The pair ``(X, Y)`` on ``[-1, 1] x [0, 2 pi)`` solves

    dX = kappa_T (chibar**2)'(X) dt + sqrt(2 a(X)) dW1,
    dY = sqrt(2 a(X)) dW2,        a = kappa_eps + kappa_T chibar**2,

and ``X`` alone is a one-dimensional diffusion with generator
``(a u')'``.  With the additive clock ``beta_t = 2 int_0^t a(X_s) ds`` and its
inverse ``alpha``, ``Xt(t) = X(alpha_t)`` solves
``dXt = (kappa_T/2) (chibar**2)'/a dt + dW``.  Both share the scale function
``s' = 1/a``, so they leave [-1, 1] through the same side with the same
probability, and the steady temperature is ``T_+ P_x(X exits at -1)``.

Notes
-----
The Euler stepper splits a step wherever ``|drift| h`` exceeds a quarter of
the profile length scale (at most 64 pieces), so the singular drift of
Hoelder profiles stays finite in every substep.  Crossing of +-1 inside a step
is caught by linear interpolation, and optionally (default) by a
Brownian-bridge test between grid points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .analytic1d import resistance
from .coefficients import (CutoffProfile, ModelParams, ParameterError, encode_profile,
                           length_scale)
from .kernels import sde_nb as _nb
from .membrane import MCSummary
from .rng import DEFAULT_SEED

MODE_XEPS = 0
MODE_TILDE = 1


@dataclass
class SdeState:
    x: float
    y: float
    t: float
    additive_clock: float


@dataclass
class SdePath:
    """One discretized trajectory with its additive clock.

    ``exit_side`` is -1 or +1 after leaving [-1, 1] and 0 if ``t_max`` came
    first.  For the time-changed process ``clock`` is still
    ``2 int a(X) ds`` evaluated along its own time axis.
    """

    times: np.ndarray
    x: np.ndarray
    y: np.ndarray
    clock: np.ndarray
    exit_side: int
    exit_time: float
    mode: int = MODE_XEPS

    def __len__(self):
        return self.times.size

    def state(self, i=-1):
        return SdeState(float(self.x[i]), float(self.y[i]), float(self.times[i]), float(self.clock[i]))


def _prep(params, profile, x0, h, t_max):
    if not isinstance(params, ModelParams):
        raise ParameterError("params must be ModelParams")
    if not h > 0:
        raise ParameterError("step h must be positive")
    if not (t_max > 0 and math.isfinite(t_max)):
        raise ParameterError("t_max must be positive and finite")
    if not -1.0 <= x0 <= 1.0:
        raise ParameterError("x0 must lie in [-1, 1]")
    if params.kappa_eps <= 0:
        raise ParameterError("the diffusions need kappa_eps > 0")
    prof = profile.resolve(params)
    return prof, encode_profile(prof, params), length_scale(prof, params)


def _run(mode, params, profile, x0, y0, h, t_max, bridge, seed, path_offset, n_paths, record):
    prof, (code, p, tx, tc), ell = _prep(params, profile, x0, h, t_max)
    if abs(x0) == 1.0:
        n = int(n_paths)
        side = int(np.sign(x0))
        res = dict(code=np.full(n, side), t_end=np.zeros(n), clock=np.zeros(n), x=np.full(n, x0),
                   y=np.full(n, y0 % (2 * math.pi)), n_sub=np.zeros(n, dtype=np.int64))
        if record:
            res.update(rec_t=[np.zeros(1)] * n, rec_x=[np.full(1, x0)] * n,
                       rec_y=[np.full(1, y0)] * n, rec_c=[np.zeros(1)] * n)
        return res
    y0 = float(y0) % (2 * math.pi)
    ke, kt = float(params.kappa_eps), float(params.kappa_T)
    if _backend.backend() == "numpy":
        from .kernels import sde_np
        return sde_np.sde_batch(mode, params, prof, ell, x0, y0, h, t_max, bridge, seed,
                                path_offset, n_paths, record)
    _backend.set_threads()
    args = (mode, ke, kt, code, p, tx, tc, float(ell), float(x0), y0, float(h), float(t_max),
            bool(bridge), int(seed))
    n = int(n_paths)
    if record:
        keys = ("code", "t_end", "clock", "x", "y", "n_sub")
        out = {k: [] for k in keys}
        recs = {k: [] for k in ("rec_t", "rec_x", "rec_y", "rec_c")}
        for i in range(n):
            cap = 4 * int(math.ceil(t_max / h)) + 16
            while True:
                bufs = [np.zeros(cap) for _ in range(4)]
                res = _nb.sde_path(*args, int(path_offset + i), *bufs)
                if not res[7]:
                    break
                cap *= 4
            for k, v in zip(keys, res[:6]):
                out[k].append(v)
            m = res[6]
            for k, b in zip(recs, bufs):
                recs[k].append(b[:m].copy())
        res = {k: np.asarray(v) for k, v in out.items()}
        res.update(recs)
        return res
    code_a = np.zeros(n, dtype=np.int64)
    te = np.zeros(n)
    cl = np.zeros(n)
    xf = np.zeros(n)
    yf = np.zeros(n)
    ns = np.zeros(n, dtype=np.int64)
    _nb.sde_batch(*args, int(path_offset), n, code_a, te, cl, xf, yf, ns)
    return dict(code=code_a, t_end=te, clock=cl, x=xf, y=yf, n_sub=ns)


def _one_path(mode, params, profile, x0, y0, h, t_max, bridge, seed, path):
    res = _run(mode, params, profile, float(x0), float(y0), h, t_max, bridge, seed, path, 1, True)
    side = int(res["code"][0])
    return SdePath(res["rec_t"][0], res["rec_x"][0], res["rec_y"][0], res["rec_c"][0], side,
                   float(res["t_end"][0]) if side != 0 else math.nan, mode)


def simulate_xeps(params: ModelParams, profile: CutoffProfile, x0, y0, h, seed=DEFAULT_SEED, path=0,
                  t_max=50.0, bridge=True) -> SdePath:
    """Euler path of ``(X, Y)`` until ``|X| = 1`` or ``t_max``.

    Parameters
    ----------
    x0, y0 : float
        Start; ``y0`` is reduced mod 2 pi.
    h : float
        Base step; the drift rule may split it further.
    seed, path : int
        Master seed and path index selecting the random stream.
    bridge : bool
        Also detect exits between grid points with the Brownian-bridge test.
    """
    return _one_path(MODE_XEPS, params, profile, x0, y0, h, t_max, bridge, seed, path)


def simulate_xtilde(params: ModelParams, profile: CutoffProfile, x0, h, seed=DEFAULT_SEED, path=0,
                    t_max=50.0, bridge=True) -> SdePath:
    """Euler path of the time-changed process (unit diffusion, no ``Y``)."""
    return _one_path(MODE_TILDE, params, profile, x0, 0.0, h, t_max, bridge, seed, path)


def sample_paths(params: ModelParams, profile: CutoffProfile, x0, n_paths, h, seed=DEFAULT_SEED,
                 y0=0.0, t_max=50.0, tilde=False, bridge=True, path_offset=0):
    """Endpoint records for many paths (dict of arrays).

    Keys ``code`` (-1, +1 exit side, 0 still inside at ``t_max``), ``t_end``,
    ``clock``, ``x``, ``y``, ``n_sub``.
    """
    if n_paths < 1:
        raise ParameterError("n_paths must be >= 1")
    mode = MODE_TILDE if tilde else MODE_XEPS
    return _run(mode, params, profile, float(x0), float(y0), h, t_max, bridge, seed, path_offset,
                n_paths, False)


def mc_exit_left(params: ModelParams, profile: CutoffProfile, x0, n_paths, h, seed=DEFAULT_SEED,
                 tilde=False, t_max=50.0, bridge=True, batch_size=None) -> MCSummary:
    """Monte Carlo estimate of ``P_x0(X exits [-1, 1] at -1)``.

    Paths still inside at ``t_max`` count as not exiting left and are
    reported in ``extra["n_timeout"]``.
    """
    bs = int(n_paths) if batch_size is None else int(batch_size)
    total = None
    for off in range(0, int(n_paths), bs):
        m = min(bs, int(n_paths) - off)
        res = sample_paths(params, profile, x0, m, h, seed, 0.0, t_max, tilde, bridge, off)
        s = MCSummary.from_values(res["code"] == -1, seed, h,
                                  dict(n_timeout=int((res["code"] == 0).sum()),
                                       n_substeps=int(res["n_sub"].sum())))
        total = s if total is None else total.merge(s)
    return total


def additive_clock(params: ModelParams, profile: CutoffProfile, path: SdePath):
    """Trapezoid recomputation of ``2 int a(X_s) ds`` along the recorded points."""
    from .coefficients import diffusivity
    a = np.asarray(diffusivity(profile, params, path.x), dtype=float)
    dt = np.diff(path.times)
    return np.concatenate(([0.0], np.cumsum(dt * (a[1:] + a[:-1]))))


def time_change(path: SdePath, grid=None) -> SdePath:
    """Relabel a path of ``X`` by its clock: ``Xt(s) = X(alpha_s)``.

    Without ``grid`` the recorded points are kept and only their times
    become clock values, so the trajectory and its exit side are unchanged.
    With ``grid`` the path is linearly interpolated at those clock values.

    Raises
    ------
    ArithmeticError
        If the clock is not strictly increasing.
    """
    c = np.asarray(path.clock)
    if c.size > 1 and not np.all(np.diff(c) > 0):
        raise ArithmeticError("additive clock is not strictly increasing")
    if grid is None:
        et = float(c[-1]) if path.exit_side != 0 else math.nan
        return SdePath(c.copy(), path.x.copy(), path.y.copy(), c.copy(), path.exit_side, et, MODE_TILDE)
    g = np.asarray(grid, dtype=float)
    if np.any(g < 0) or np.any(g > c[-1]):
        raise ParameterError("grid must lie within [0, final clock]")
    xi = np.interp(g, c, path.x)
    yi = np.interp(g, c, np.unwrap(path.y)) % (2 * math.pi)
    et = float(c[-1]) if path.exit_side != 0 else math.nan
    return SdePath(g, xi, yi, g.copy(), path.exit_side, et, MODE_TILDE)


def exit_prob_exact(params: ModelParams, profile: CutoffProfile, x, x1=-1.0, x2=1.0, rtol=1e-12):
    """``P_x(tau_x1 < tau_x2) = (s(x2) - s(x)) / (s(x2) - s(x1))`` with ``s' = 1/a``."""
    if not (-1.0 <= x1 <= x <= x2 <= 1.0 and x1 < x2):
        raise ParameterError("need -1 <= x1 <= x <= x2 <= 1 with x1 < x2")
    if x == x1:
        return 1.0
    if x == x2:
        return 0.0
    right = resistance(params, profile, x, x2, rtol=rtol)
    left = resistance(params, profile, x1, x, rtol=rtol)
    return right / (left + right)


def feynman_kac(params: ModelParams, profile: CutoffProfile, theta0, x, y, t, n_paths, h,
                seed=DEFAULT_SEED, bridge=True, batch_size=None) -> MCSummary:
    """Estimate ``T(x, y, t) = E[theta0(X_t, Y_t); tau > t] + T_+ P(tau <= t, X_tau = -1)``.

    ``theta0(x, y)`` must be vectorized and bounded; tests only use
    continuous initial fields.
    """
    if not t > 0:
        raise ParameterError("t must be positive")
    if not -1.0 <= x <= 1.0:
        raise ParameterError("x must lie in [-1, 1]")
    bs = int(n_paths) if batch_size is None else int(batch_size)
    total = None
    for off in range(0, int(n_paths), bs):
        m = min(bs, int(n_paths) - off)
        res = _run(MODE_XEPS, params, profile, float(x), float(y), h, float(t), bridge, seed, off, m, False)
        inside = res["code"] == 0
        vals = np.where(res["code"] == -1, params.T_plus, 0.0)
        if inside.any():
            th = np.asarray(theta0(res["x"][inside], res["y"][inside]), dtype=float)
            th = np.broadcast_to(th, (int(inside.sum()),))
            if not np.all(np.isfinite(th)):
                raise ParameterError("theta0 returned non-finite values")
            vals[inside] = th
        s = MCSummary.from_values(vals, seed, h, dict(n_inside=int(inside.sum())))
        total = s if total is None else total.merge(s)
    return total
