import math

import numpy as np
import pytest

from barrier_lab import analytic1d as an
from barrier_lab import pde2d
from barrier_lab.coefficients import CutoffProfile, ModelParams, ParameterError, diffusivity

FLAT = ModelParams(eps=0.1, kappa_eps=0.3, kappa_T=0.1)
ZERO = CutoffProfile.constant(0.0)


def sup_error(field, params, prof):
    grid = np.concatenate([[-1.0], field.grid.x, [1.0]])
    ref = an.stationary_profile(params, prof, grid).temps[1:-1]
    return float(np.max(np.abs(field.profile_x() - ref)))


@pytest.fixture(scope="module")
def fig1_steady():
    params = ModelParams(eps=0.1, kappa_eps=0.004, kappa_T=0.1)
    prof = CutoffProfile.arctan_example(eps=0.2)
    return params, prof, pde2d.solve_steady(pde2d.assemble(params, prof, 256, 8))


class TestAssemble:
    def test_flat_faces(self):
        g = pde2d.assemble(FLAT, ZERO, 32, 4, graded=False)
        np.testing.assert_allclose(g.a_face, 0.3, rtol=1e-15)

    def test_row_sums(self, fig1):
        g = pde2d.assemble(*fig1, 64, 4)
        np.testing.assert_allclose(g.stencil_row_sums(), 0.0, atol=1e-12 * g.gx.max())

    def test_harmonic_below_arithmetic(self):
        P = ModelParams(eps=0.01, kappa_eps=1e-4, kappa_T=1.0)
        prof = CutoffProfile.piecewise_power(alpha=1.0)
        g = pde2d.assemble(P, prof, 400, 4)
        # interior face with the largest diffusivity jump, inside the barrier
        jump = g.a[1:] / g.a[:-1]
        jump = np.where(np.abs(g.xf[1:-1]) < 4 * P.eps, np.maximum(jump, 1 / jump), 0.0)
        f = int(np.argmax(jump)) + 1
        lo, hi = sorted((g.a[f - 1], g.a[f]))
        assert hi / lo > 1.1
        assert lo <= g.a_face[f] < 0.5 * (lo + hi)
        assert g.a_face[f] - lo < hi - g.a_face[f]

    def test_small_grid(self):
        with pytest.raises(ParameterError):
            pde2d.assemble(FLAT, ZERO, 3, 8)

    def test_needs_positive_diffusivity(self):
        with pytest.raises(ParameterError):
            pde2d.assemble(ModelParams(eps=0.1, kappa_eps=0.0, kappa_T=1.0), CutoffProfile.arctan_example(), 16, 4)

    def test_mesh_ratio(self, fig1):
        g = pde2d.assemble(*fig1, 256, 4)
        assert g.max_ratio <= pde2d.MAX_RATIO
        assert g.xf[0] == -1.0 and g.xf[-1] == 1.0 and np.all(g.dx > 0)


class TestSteady:
    def test_linear(self):
        f = pde2d.solve_steady(pde2d.assemble(FLAT, ZERO, 40, 6, graded=False))
        np.testing.assert_allclose(f.values, (FLAT.T_plus * (1 - f.grid.x) / 2)[:, None] + 0 * f.values,
                                   atol=1e-10)

    def test_fig1(self, fig1_steady):
        params, prof, f = fig1_steady
        assert f.info["true_residual"] <= 1e-10
        assert f.y_variation() <= 1e-10
        assert sup_error(f, params, prof) <= 1e-3 * params.T_plus
        fl = f.column_fluxes()
        assert (fl.max() - fl.min()) / abs(fl.mean()) <= 1e-8
        assert fl.mean() == pytest.approx(an.flux(params, prof), rel=1e-3)

    def test_order(self, fig1):
        params, prof = fig1
        errs = [sup_error(pde2d.solve_steady(pde2d.assemble(params, prof, n, 4)), params, prof)
                for n in (64, 128, 256)]
        orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert np.all(orders >= 1.8)

    def test_value_at(self, fig1_steady):
        params, _, f = fig1_steady
        assert f.value_at(-1.0, 1.0) == pytest.approx(params.T_plus)
        assert f.value_at(1.0, 4.0) == 0.0
        g = f.grid
        assert f.value_at(g.x[10], g.y[2]) == pytest.approx(f.values[10, 2], rel=1e-14)


class TestTransient:
    def test_max_principle(self, fig1):
        params, prof = fig1
        g = pde2d.assemble(params, prof, 64, 8)
        rs = np.random.default_rng(0)
        f = pde2d.initial_field(g, lambda x, y: params.T_plus * rs.uniform(size=np.shape(x)))
        for dt in (1e-3, 0.1, 10.0):
            for _ in range(5):
                f = pde2d.step_transient(g, f, dt)
                # solver tolerance 1e-12 relative
                assert f.values.min() >= -1e-10 * params.T_plus
                assert f.values.max() <= params.T_plus * (1 + 1e-10)

    def test_fixed_point(self, fig1):
        g = pde2d.assemble(*fig1, 64, 4)
        s = pde2d.solve_steady(g)
        f = pde2d.step_transient(g, s, 0.5)
        np.testing.assert_allclose(f.values, s.values, atol=1e-10)

    def test_monotone_from_zero(self):
        P = ModelParams(eps=0.1, kappa_eps=0.05, kappa_T=0.5)
        prof = CutoffProfile.arctan_example(eps=0.1)
        g = pde2d.assemble(P, prof, 64, 4)
        s = pde2d.solve_steady(g)
        dist = []
        f = pde2d.initial_field(g, 0.0)
        prev = f.values.copy()
        f = pde2d.run_transient(g, f, 2.0, 0.05, callback=lambda fl: dist.append(np.abs(fl.values - s.values).max()))
        assert np.all(np.diff(dist) <= 1e-12)
        assert dist[-1] < 0.5 * dist[0]
        assert np.all(f.values >= prev - 1e-12)
        assert f.t == 2.0

    def test_y_decay(self):
        g = pde2d.assemble(FLAT, ZERO, 32, 16, graded=False)
        f = pde2d.initial_field(g, lambda x, y: 1.0 + 0.5 * np.sin(y))
        v0 = f.y_variation()
        var = []
        f = pde2d.run_transient(g, f, 30.0, 0.1, callback=lambda fl: var.append(fl.y_variation()))
        assert var[0] < v0
        assert np.all(np.diff(var) <= 1e-14)
        assert var[-1] < 1e-6

    def test_rejects_bad_dt(self, fig1):
        g = pde2d.assemble(*fig1, 16, 4)
        with pytest.raises(ParameterError):
            pde2d.step_transient(g, pde2d.initial_field(g, 0.0), 0.0)


def test_backend_parity(monkeypatch, fig1):
    out = []
    for name in ("numba", "numpy"):
        monkeypatch.setenv("BARRIER_LAB_BACKEND", name)
        g = pde2d.assemble(*fig1, 64, 6)
        out.append(pde2d.solve_steady(g).values)
        x = np.random.default_rng(4).normal(size=(64, 6))
        out.append(pde2d.apply_operator(g, x))
    np.testing.assert_allclose(out[0], out[2], atol=1e-11)
    np.testing.assert_allclose(out[1], out[3], rtol=1e-13, atol=1e-13)
