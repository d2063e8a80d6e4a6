import math

import numpy as np
import pytest

from barrier_lab import analytic1d as an
from barrier_lab import pde2d
from barrier_lab import sdepath as sd
from barrier_lab.coefficients import CutoffProfile, ModelParams, ParameterError

FLAT = ModelParams(eps=0.1, kappa_eps=0.5, kappa_T=0.1)
ZERO = CutoffProfile.constant(0.0)


def survival_bm(x, t, var=1.0):
    """P(tau > t) for BM with variance ``var`` per unit time on (-1, 1)."""
    k = np.arange(1, 801, 2)
    return float(np.sum(4 / (k * np.pi) * np.sin(k * np.pi * (x + 1) / 2)
                        * np.exp(-(k * np.pi) ** 2 * var * t / 8)))


class TestExit:
    def test_symmetric_half(self):
        s = sd.mc_exit_left(FLAT, ZERO, 0.0, 20_000, 1e-3, seed=4)
        assert s.extra["n_timeout"] == 0
        assert abs(s.estimate - 0.5) < 3 * s.std_error

    def test_fig1_exit(self, fig1):
        params, prof = fig1
        exact = sd.exit_prob_exact(params, prof, 0.3)
        s = sd.mc_exit_left(params, prof, 0.3, 4000, 1e-3, seed=8)
        assert abs(s.estimate - exact) < 3.5 * s.std_error

    def test_exact_linear(self):
        for x in (-0.7, 0.0, 0.4):
            assert sd.exit_prob_exact(FLAT, ZERO, x) == pytest.approx((1 - x) / 2, rel=1e-12)
        assert sd.exit_prob_exact(FLAT, ZERO, -1.0) == 1.0
        assert sd.exit_prob_exact(FLAT, ZERO, 1.0) == 0.0

    def test_exact_is_steady_temperature(self, fig1):
        params, prof = fig1
        T = an.temperature_at(params, prof, 0.5)
        assert params.T_plus * sd.exit_prob_exact(params, prof, 0.5) == pytest.approx(T, abs=1e-8)

    def test_boundary_start(self):
        r = sd.sample_paths(FLAT, ZERO, -1.0, 5, 1e-3)
        assert np.all(r["code"] == -1) and np.all(r["t_end"] == 0)

    def test_rejects(self):
        with pytest.raises(ParameterError):
            sd.mc_exit_left(FLAT, ZERO, 1.5, 10, 1e-3)
        with pytest.raises(ParameterError):
            sd.mc_exit_left(FLAT, ZERO, 0.0, 10, -1.0)
        with pytest.raises(ParameterError):
            sd.mc_exit_left(FLAT.with_(kappa_eps=0.0), ZERO, 0.0, 10, 1e-3)


class TestClock:
    def test_identity_and_lower_bound(self, fig1):
        params, prof = fig1
        p = sd.simulate_xeps(params, prof, 0.3, 1.0, 1e-3, seed=1)
        c = sd.additive_clock(params, prof, p)
        assert np.max(np.abs(c - p.clock)) <= 1e-12 * max(1.0, p.clock[-1])
        assert np.all(p.clock >= 2 * params.kappa_eps * p.times - 1e-15)
        assert np.all(np.diff(p.clock) > 0)

    def test_time_change_keeps_exit(self, fig1):
        params, prof = fig1
        for path in range(4):
            p = sd.simulate_xeps(params, prof, -0.2, 0.0, 1e-3, seed=2, path=path)
            q = sd.time_change(p)
            assert q.exit_side == p.exit_side != 0
            np.testing.assert_array_equal(q.x, p.x)
            assert q.exit_time == pytest.approx(p.clock[-1])

    def test_time_change_grid(self, fig1):
        params, prof = fig1
        p = sd.simulate_xeps(params, prof, 0.1, 0.0, 1e-3, seed=5)
        g = np.linspace(0, p.clock[-1], 50)
        q = sd.time_change(p, g)
        assert q.x[0] == pytest.approx(0.1) and q.x[-1] == pytest.approx(p.x[-1])
        with pytest.raises(ParameterError):
            sd.time_change(p, [p.clock[-1] * 2])

    def test_tilde_exit_matches(self, fig1):
        params, prof = fig1
        exact = sd.exit_prob_exact(params, prof, 0.3)
        s = sd.mc_exit_left(params, prof, 0.3, 4000, 2e-4, seed=9, tilde=True)
        assert abs(s.estimate - exact) < 3.5 * s.std_error


class TestWeakOrder:
    def test_monitoring_bias_halves(self):
        # constant coefficients: without the bridge test the only bias is discrete monitoring,
        # which scales like sqrt(h)
        exact = survival_bm(0.5, 0.5)
        bias = []
        for h in (0.04, 0.01):
            r = sd.sample_paths(FLAT, ZERO, 0.5, 100_000, h, seed=3, t_max=0.5, bridge=False)
            bias.append((r["code"] == 0).mean() - exact)
        assert 2 * 0.7 <= bias[0] / bias[1] <= 2 * 1.3

    def test_bridge_removes_bias(self):
        exact = survival_bm(0.5, 0.5)
        r = sd.sample_paths(FLAT, ZERO, 0.5, 100_000, 0.04, seed=3, t_max=0.5, bridge=True)
        s = (r["code"] == 0).mean()
        assert abs(s - exact) < 3 * math.sqrt(exact * (1 - exact) / 1e5)


def test_feynman_kac_vs_pde(fig1):
    params, prof = fig1
    grid = pde2d.assemble(params, prof, 256, 32)

    def theta0(x, y):
        return (1 - x) + 0.3 * (1 - x * x) * np.sin(y)

    field = pde2d.run_transient(grid, pde2d.initial_field(grid, theta0, params.T_plus), 5.0, 0.01)
    ref = field.value_at(0.5, math.pi)
    s = sd.feynman_kac(params, prof, theta0, 0.5, math.pi, 5.0, 10_000, 1e-3, seed=6)
    assert abs(s.estimate - ref) < 3 * s.std_error


def test_backend_parity(monkeypatch, fig1):
    params, prof = fig1
    out = {}
    for name in ("numba", "numpy"):
        monkeypatch.setenv("BARRIER_LAB_BACKEND", name)
        out[name] = sd.sample_paths(params, prof, 0.2, 30, 1e-3, seed=12)
    np.testing.assert_array_equal(out["numba"]["code"], out["numpy"]["code"])
    for k in ("t_end", "clock", "x"):
        np.testing.assert_allclose(out["numba"][k], out["numpy"][k], rtol=1e-10, atol=1e-12)
