import math

import numpy as np
import pytest
from scipy import stats

from barrier_lab import membrane as mb
from barrier_lab.coefficients import ParameterError
from barrier_lab.hitting import MembraneParams, hit_prob_membrane, HittingQuery
from barrier_lab.kernels import membrane_nb as nb

INF = math.inf


def free_endpoints(spec, x0, side, t, n, h=1e-3, seed=11):
    return mb.run_paths(spec, x0, side, -INF, INF, h, t, seed, 0, n)


class TestReflected:
    def test_mean_abs(self):
        res = free_endpoints(mb.ProcessSpec("reflected"), 0.0, 1, 1.0, 100_000)
        x = res["x_final"]
        assert np.all(x >= 0)
        se = x.std() / math.sqrt(x.size)
        assert abs(x.mean() - math.sqrt(2 / math.pi)) < 3 * se

    def test_ks_half_normal(self):
        # beta = 0: the SNOB never switches and is |N(0, t)| in law
        spec = mb.ProcessSpec("snob", MembraneParams(0.0, 0.0))
        res = free_endpoints(spec, 0.0, 1, 1.0, 10_000, seed=5)
        assert np.all(res["n_switch"] == 0)
        assert stats.kstest(res["x_final"], stats.halfnorm(scale=1.0).cdf).pvalue > 1e-3

    def test_no_local_time_far_away(self):
        p = mb.simulate_reflected_bm(5.0, 1e-3, 1.0, seed=3)
        assert p.local_time[-1] == 0.0
        assert np.all(p.positions > 0)

    def test_regulator_nondecreasing(self):
        p = mb.simulate_reflected_bm(0.0, 1e-3, 2.0, seed=4)
        assert np.all(np.diff(p.local_time) >= 0)
        assert np.all(p.positions >= 0)

    def test_rejects_negative_start(self):
        with pytest.raises(ParameterError):
            mb.simulate_reflected_bm(-0.1, 1e-3, 1.0)


class TestSnob:
    def test_sign_consistency(self):
        mp = MembraneParams(2.0, 0.5)
        for path in range(5):
            p = mb.simulate_snob("+0", mp, 1e-4, 3.0, seed=9, path=path)
            assert p.sign_consistent()
            flips = int(np.count_nonzero(np.diff(p.side_trace.astype(int))))
            assert flips == p.n_switches

    def test_local_time_mean(self):
        lt = mb.local_time_at_hit(0.5, 20_000, 1e-4, master_seed=21)
        se = lt.std() / math.sqrt(lt.size)
        assert abs(lt.mean() - 0.5) < 3 * se
        # exponential law: variance b^2
        assert lt.var() == pytest.approx(0.25, rel=0.1)

    def test_brownian_exit(self):
        s = mb.mc_exit_probability(mb.ProcessSpec("brownian"), -1.0, 3.0, 0.0, 20_000, 4e-4)
        assert abs(s.estimate - 0.75) < 3 * s.std_error

    def test_exit_probability(self):
        mp = MembraneParams(1.0, 1.0)
        s = mb.mc_exit_probability(mb.ProcessSpec("snob", mp), -1.0, 1.0, "+0", 10_000, 1e-4)
        exact = hit_prob_membrane(HittingQuery(-1, 1, "+0", mp))
        assert s.extra["n_timeout"] == 0
        assert abs(s.estimate - exact) < 3.5 * s.std_error

    def test_elastic(self):
        s = mb.mc_elastic_hit(2.0, 3.0, 20_000, 1e-3)
        assert abs(s.estimate - 1 / 7) < 3.5 * s.std_error

    def test_walls(self):
        mp = MembraneParams(1.0, 1.0)
        s = mb.mc_exit_probability(mb.ProcessSpec("snob_walls", mp), -1, 1, "+0", 10_000, 4e-4)
        assert abs(s.estimate - 0.4) < 3.5 * s.std_error

    def test_step_guard(self):
        with pytest.raises(ParameterError):
            mb.mc_exit_probability(mb.ProcessSpec("snob", MembraneParams(1, 1)), -0.1, 1, "+0", 10, 1e-3)


class TestReproducibility:
    def test_deterministic(self):
        spec = mb.ProcessSpec("snob", MembraneParams(1.0, 1.0))
        a = mb.sample_exits(spec, -1, 1, "+0", 200, 1e-3, master_seed=7)
        b = mb.sample_exits(spec, -1, 1, "+0", 200, 1e-3, master_seed=7)
        for k in a:
            np.testing.assert_array_equal(a[k], b[k])

    def test_batches_merge_to_whole(self):
        spec = mb.ProcessSpec("snob", MembraneParams(1.0, 1.0))
        whole = mb.mc_exit_probability(spec, -1, 1, "+0", 300, 1e-3, master_seed=2)
        parts = mb.mc_exit_probability(spec, -1, 1, "+0", 300, 1e-3, master_seed=2, batch_size=70)
        assert whole.estimate == pytest.approx(parts.estimate, abs=1e-15)
        assert whole.std_error == pytest.approx(parts.std_error, rel=1e-12)

    def test_merge_associative(self):
        rs = np.random.default_rng(0)
        vals = [rs.integers(0, 2, size=m) for m in (5, 9, 13)]
        s = [mb.MCSummary.from_values(v, 1, 0.1) for v in vals]
        left = s[0].merge(s[1]).merge(s[2])
        right = s[0].merge(s[1].merge(s[2]))
        assert left.estimate == right.estimate
        assert left.n_paths == 27

    def test_backend_parity(self, monkeypatch):
        spec = mb.ProcessSpec("snob_walls", MembraneParams(1.5, 0.7))
        out = {}
        for name in ("numba", "numpy"):
            monkeypatch.setenv("BARRIER_LAB_BACKEND", name)
            out[name] = mb.sample_exits(spec, -1, 1, "-0", 50, 1e-3, master_seed=13)
        for k in ("code", "n_switch"):
            np.testing.assert_array_equal(out["numba"][k], out["numpy"][k])
        for k in ("t_exit", "lt", "wl", "wr", "x_final"):
            np.testing.assert_allclose(out["numba"][k], out["numpy"][k], rtol=1e-12, atol=1e-14)
