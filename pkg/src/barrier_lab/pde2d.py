"""Finite-volume solver for the averaged heat equation on the strip.

Solves ``T_t = div(a(x) grad T)`` with ``a = kappa_eps + kappa_T chibar**2`` on
``[-1, 1] x [0, 2 pi)``, ``T(-1, y) = T_plus``, ``T(1, y) = 0`` and periodic
``y``.  Cells are centered; x-faces carry the distance-weighted harmonic mean
of the neighbouring cell diffusivities, the wall faces take the wall value
as the outer neighbour.  The discrete operator is a symmetric M-matrix, so
the steady solve and every implicit-Euler step go through Jacobi-PCG.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .coefficients import (ARCTAN_WALL_SCALE, KIND_ARCTAN, KIND_CONSTANT, KIND_PIECEWISE,
                           CutoffProfile, ModelParams, ParameterError, diffusivity)
from .kernels import pde_nb as _nb
from .kernels import pde_np as _np

RTOL = 1e-12
# steady solves iterate further so column fluxes agree to ~1e-9
STEADY_TARGET = 1e-14
MAX_RATIO = 1.2
TWO_PI = 2.0 * math.pi


class SolverError(ArithmeticError):
    """CG did not reach the tolerance; carries the achieved residual."""

    def __init__(self, msg, residual, iterations):
        super().__init__(f"{msg} (relative residual {residual:.3e} after {iterations} iterations)")
        self.residual = residual
        self.iterations = iterations


# ---------------------------------------------------------------------------
# mesh

def _foci(params, profile):
    """``(location, core width)`` pairs where ``1/a`` varies fastest."""
    prof = profile.resolve(params)
    if prof.kind == KIND_CONSTANT:
        return []
    ke, kt = params.kappa_eps, params.kappa_T
    s = math.sqrt(ke / (ke + kt)) if kt > 0 else 1.0
    al = prof.alpha if prof.kind == KIND_PIECEWISE else 1.0
    out = [(0.0, prof.eps * s ** (1.0 / al))]
    if prof.includes_boundary_layers:
        if prof.boundary is not None:
            b = prof.boundary
            w, bal = b.eps, (b.alpha if b.kind == KIND_PIECEWISE and b.alpha else 1.0)
        elif prof.kind == KIND_ARCTAN:
            w, bal = 1.0 / ARCTAN_WALL_SCALE, 1.0
        else:
            w, bal = prof.eps, al
        core = w * s ** (1.0 / bal)
        out += [(-1.0, core), (1.0, core)]
    return out


def _density_cdf(x, foci, c0):
    # rho(x) = c0 + sum_f 1 / (l_f + |x - f|): geometric cells near each focus
    F = c0 * (x + 1.0)
    for f, l in foci:
        g = lambda z: np.sign(z - f) * np.log1p(np.abs(z - f) / l)  # noqa: E731
        F = F + g(x) - g(-1.0)
    return F


def graded_faces(params: ModelParams, profile: CutoffProfile, nx: int, graded=True):
    """Face coordinates ``-1 = x_0 < ... < x_nx = 1``.

    The graded mesh inverts the cumulative of a density with a ``1/distance``
    peak at the barrier and at each wall layer, so spacing grows
    geometrically away from them.  The map is fixed and smooth, so the
    second-order convergence of the scheme carries over in ``nx``.
    """
    foci = _foci(params, profile) if graded else []
    if not foci:
        return np.linspace(-1.0, 1.0, nx + 1)
    foci = [(f, l / 4.0) for f, l in foci]
    logs = _density_cdf(np.array([1.0]), foci, 0.0)[0]
    c0 = max(0.5, 0.1 * logs)
    total = _density_cdf(np.array([1.0]), foci, c0)[0]
    target = np.linspace(0.0, total, nx + 1)[1:-1]
    lo = np.full(target.shape, -1.0)
    hi = np.full(target.shape, 1.0)
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        below = _density_cdf(mid, foci, c0) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return np.concatenate([[-1.0], 0.5 * (lo + hi), [1.0]])


# ---------------------------------------------------------------------------
# grid and field

@dataclass
class Grid2D:
    """Assembled finite-volume grid.

    Attributes
    ----------
    nx, ny : int
    xf : ndarray, shape (nx+1,)
        x-face coordinates.
    x, y : ndarray
        Cell centers.
    dx : ndarray, shape (nx,)
    dy : float
    a : ndarray, shape (nx,)
        Diffusivity at cell centers.
    a_face : ndarray, shape (nx+1,)
        Harmonic-mean x-face diffusivities (the ends couple to the walls).
    gx, gy : ndarray
        Conductances: ``gx = a_face * dy / distance``, ``gy = a * dx / dy``.
    """

    params: ModelParams
    profile: CutoffProfile
    nx: int
    ny: int
    xf: np.ndarray
    x: np.ndarray
    y: np.ndarray
    dx: np.ndarray
    dy: float
    a: np.ndarray
    a_face: np.ndarray
    gx: np.ndarray
    gy: np.ndarray

    @property
    def max_ratio(self):
        """Largest ratio of neighbouring cell widths."""
        r = self.dx[1:] / self.dx[:-1]
        return float(np.max(np.maximum(r, 1.0 / r))) if r.size else 1.0

    def area(self):
        return self.dx * self.dy

    def stencil_row_sums(self):
        """Row sums of the interior stencil (zero by conservation)."""
        d = self.gx[:-1] + self.gx[1:] + 2.0 * self.gy
        return d - self.gx[:-1] - self.gx[1:] - 2.0 * self.gy


@dataclass
class Field2D:
    """Cell temperatures ``values[i, j]`` at ``(x_i, y_j)``.

    The ghost values ``T_plus`` (x = -1) and 0 (x = 1) encode the Dirichlet
    walls.
    """

    grid: Grid2D
    values: np.ndarray
    T_plus: float
    t: float = 0.0
    info: dict = field(default_factory=dict)

    @property
    def ghost_left(self):
        return self.T_plus

    @property
    def ghost_right(self):
        return 0.0

    def column_fluxes(self):
        """Heat flux per unit y-length through each x-face, shape (nx+1,)."""
        g = self.grid
        T = self.values
        ext = np.vstack([np.full((1, g.ny), self.T_plus), T, np.zeros((1, g.ny))])
        drop = ext[:-1] - ext[1:]
        return g.gx * drop.sum(axis=1) / TWO_PI

    def profile_x(self):
        """y-average of each column."""
        return self.values.mean(axis=1)

    def y_variation(self):
        return float(np.max(self.values.max(axis=1) - self.values.min(axis=1)))

    def value_at(self, x, y):
        """Bilinear interpolation, walls included, periodic in y."""
        g = self.grid
        xs = np.concatenate([[-1.0], g.x, [1.0]])
        ext = np.vstack([np.full((1, g.ny), self.T_plus), self.values, np.zeros((1, g.ny))])
        i = int(np.clip(np.searchsorted(xs, x) - 1, 0, xs.size - 2))
        wx = (x - xs[i]) / (xs[i + 1] - xs[i])
        s = (y % TWO_PI) / g.dy - 0.5
        j0 = int(math.floor(s))
        wy = s - j0
        j0 %= g.ny
        j1 = (j0 + 1) % g.ny
        col = lambda k: (1 - wx) * ext[i, k] + wx * ext[i + 1, k]  # noqa: E731
        return float((1 - wy) * col(j0) + wy * col(j1))


def assemble(params: ModelParams, profile: CutoffProfile, nx: int, ny: int, graded=True) -> Grid2D:
    """Build the conservative 5-point divergence-form stencil.

    Raises
    ------
    ParameterError
        ``nx`` or ``ny`` below 4, or a non-positive diffusivity.
    """
    nx, ny = int(nx), int(ny)
    if nx < 4 or ny < 4:
        raise ParameterError(f"grid too small: need nx, ny >= 4, got nx={nx}, ny={ny}")
    if not params.kappa_eps > 0:
        raise ParameterError("face diffusivities must be strictly positive (need kappa_eps > 0)")
    xf = graded_faces(params, profile, nx, graded)
    x = 0.5 * (xf[1:] + xf[:-1])
    dx = np.diff(xf)
    dy = TWO_PI / ny
    y = (np.arange(ny) + 0.5) * dy
    a = np.asarray(diffusivity(profile, params, x), dtype=float)
    aw = np.asarray(diffusivity(profile, params, np.array([-1.0, 1.0])), dtype=float)
    if not (np.all(a > 0) and np.all(aw > 0)):
        raise ParameterError("face diffusivities must be strictly positive (need kappa_eps > 0)")
    # neighbour points for each face: walls at the ends
    left = np.concatenate([[-1.0], x])
    right = np.concatenate([x, [1.0]])
    al = np.concatenate([[aw[0]], a])
    ar = np.concatenate([a, [aw[1]]])
    dl = xf - left
    dr = right - xf
    dist = dl + dr
    a_face = dist / (dl / al + dr / ar)
    gx = a_face * dy / dist
    gy = a * dx / dy
    return Grid2D(params, profile, nx, ny, xf, x, y, dx, dy, a, a_face, gx, gy)


# ---------------------------------------------------------------------------
# solves

def _solve(grid, m, b, x0, target=RTOL):
    maxit = 10 * grid.nx * grid.ny
    x = np.ascontiguousarray(x0, dtype=float).copy()
    if _backend.backend() == "numba":
        it, res = _nb.pcg(grid.gx, grid.gy, m, np.ascontiguousarray(b), x, target, maxit)
    else:
        it, res = _np.pcg(grid.gx, grid.gy, m, b, x, target, maxit)
    if not res <= RTOL:
        raise SolverError("conjugate gradient did not converge", res, it)
    return x, {"iterations": int(it), "residual": float(res)}


def _rhs(grid, T_plus):
    b = np.zeros((grid.nx, grid.ny))
    b[0] += grid.gx[0] * T_plus
    return b


def apply_operator(grid: Grid2D, T, m=None):
    """Discrete operator ``A T`` (stencil matvec, active backend)."""
    m = np.zeros(grid.nx) if m is None else m
    T = np.ascontiguousarray(T, dtype=float)
    if _backend.backend() == "numba":
        out = np.empty_like(T)
        _nb.matvec(grid.gx, grid.gy, m, T, out)
        return out
    return _np.matvec(grid.gx, grid.gy, m, T)


def solve_steady(grid: Grid2D, T_plus=None) -> Field2D:
    """Steady state; starts from the linear profile.

    CG runs toward ``STEADY_TARGET`` and fails only above ``RTOL``.

    ``info`` reports the CG iteration count and the relative residual of the
    final iterate recomputed from the operator.
    """
    T_plus = grid.params.T_plus if T_plus is None else float(T_plus)
    b = _rhs(grid, T_plus)
    x0 = np.repeat((T_plus * (1.0 - grid.x) / 2.0)[:, None], grid.ny, axis=1)
    T, info = _solve(grid, np.zeros(grid.nx), b, x0, STEADY_TARGET)
    r = b - apply_operator(grid, T)
    info["true_residual"] = float(np.linalg.norm(r) / np.linalg.norm(b))
    return Field2D(grid, T, T_plus, math.inf, info)


def initial_field(grid: Grid2D, theta0, T_plus=None) -> Field2D:
    """Field from ``theta0(x, y)`` (vectorized) or a constant."""
    T_plus = grid.params.T_plus if T_plus is None else float(T_plus)
    X, Y = np.meshgrid(grid.x, grid.y, indexing="ij")
    vals = np.broadcast_to(theta0(X, Y) if callable(theta0) else float(theta0), X.shape)
    vals = np.array(vals, dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ParameterError("initial field must be bounded")
    return Field2D(grid, vals, T_plus, 0.0)


def step_transient(grid: Grid2D, field: Field2D, dt: float) -> Field2D:
    """One implicit-Euler step of length ``dt``."""
    if not dt > 0:
        raise ParameterError("dt must be positive")
    m = grid.dx * grid.dy / dt
    b = _rhs(grid, field.T_plus) + m[:, None] * field.values
    T, info = _solve(grid, m, b, field.values)
    return Field2D(grid, T, field.T_plus, field.t + dt, info)


def run_transient(grid: Grid2D, field: Field2D, t_final: float, dt: float, callback=None) -> Field2D:
    """Step from ``field.t`` to ``t_final``; the last step is shortened to land on it."""
    n = max(1, int(math.ceil((t_final - field.t) / dt - 1e-12)))
    for k in range(n):
        h = min(dt, t_final - field.t) if k == n - 1 else dt
        field = step_transient(grid, field, h)
        if k == n - 1:
            field.t = float(t_final)
        if callback is not None:
            callback(field)
    return field


def flux_table(field: Field2D):
    """Rows ``(x_face, flux)`` for the steady flux report."""
    return np.column_stack([field.grid.xf, field.column_fluxes()])
