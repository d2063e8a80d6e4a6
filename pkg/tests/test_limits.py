import math

import numpy as np
import pytest
from scipy import integrate

from barrier_lab import limits as lm
from barrier_lab.coefficients import CutoffProfile, ModelParams, ParameterError


def params(alpha, eps, ratio=None, kT=1.0):
    ke = 1.0 if ratio is None else kT / ratio
    return ModelParams(eps=eps, kappa_eps=ke, kappa_T=kT, alpha=alpha)


def brute_pbar(alpha, eps, ratio):
    """Independent oracle: scipy quad on the physical variable."""
    def g(x):
        u = x / eps
        if u <= 1:
            c = 0.5 * u ** alpha
        elif u <= 2:
            c = 1 - 0.5 * (2 - u) ** alpha
        else:
            c = 1.0
        return 1.0 / (1.0 + ratio * c * c)
    opts = dict(epsabs=0, epsrel=1e-13, limit=500)
    parts = [integrate.quad(g, eps * lo, eps * hi, **opts)[0] for lo, hi in ((0, 1), (1, 2), (2, 4))]
    return parts[2] / sum(parts)


class TestQuadrature:
    def test_brownian(self):
        P = ModelParams(eps=0.01, kappa_eps=1.0, kappa_T=0.0)
        assert lm.p_plus_quadrature(P) == pytest.approx(0.5, rel=1e-14)

    @pytest.mark.parametrize("alpha,ratio", [(1.0, 1e4), (0.5, 300.0), (0.25, 1e6), (1.5, 50.0)])
    def test_vs_scipy(self, alpha, ratio):
        p = lm.p_plus_quadrature(params(alpha, 0.01, ratio))
        assert p == pytest.approx(brute_pbar(alpha, 0.01, ratio), rel=1e-9)

    @pytest.mark.parametrize("alpha", [0.25, 0.5, 1.0, 2.0])
    def test_even_profile_symmetry(self, alpha):
        for L in (1.0, 5.0, 12.0):
            P = params(alpha, 0.01)
            assert lm.p_plus_quadrature(P, log_ratio=L) == pytest.approx(
                lm.p_minus_quadrature(P, log_ratio=L), rel=1e-12)

    def test_decreasing_in_ratio(self):
        for alpha in (0.3, 1.0):
            p = [lm.p_plus_quadrature(params(alpha, 0.01), log_ratio=L) for L in (0, 2, 4, 8, 16)]
            assert all(0 < v < 1 for v in p)
            assert np.all(np.diff(p) < 0)

    @pytest.mark.parametrize("alpha", [0.75, 1.0, 2.0])
    def test_decomposition(self, alpha):
        for ratio in (10.0, 1e4, 1e8):
            a = lm.p_plus_quadrature(params(alpha, 1e-3, ratio))
            assert lm.p_plus_decomposed(alpha, ratio) == pytest.approx(a, rel=1e-10)

    def test_log_space_huge_ratio(self):
        # log r = 1/(K eps) at eps = 1e-4, K = 4 is far beyond float range
        p = lm.p_plus_quadrature(params(0.5, 1e-4), log_ratio=2500.0)
        assert 0 < p < 1e-3


class TestLimits:
    def test_beta_alpha1(self):
        assert lm.beta_limit(1.0, 1.0) == pytest.approx(1 / math.pi, rel=1e-12)

    def test_beta_half(self):
        assert lm.beta_limit(0.5, 2.0) == 0.5

    def test_beta_three_halves(self):
        I = integrate.quad(lambda v: 1 / (1 + 0.25 * v ** 3), 0, np.inf, epsabs=0, epsrel=1e-13)[0]
        assert lm.beta_limit(1.5, 1.0) == pytest.approx(1 / I, rel=1e-10)

    def test_beta_rejects(self):
        with pytest.raises(lm.RegimeError):
            lm.beta_limit(0.25, 1.0)
        with pytest.raises(ParameterError):
            lm.beta_limit(1.0, 0.0)

    def test_exact_limit_alpha1(self):
        # quadrature oracle: pbar/eps -> 2K/pi on the critical schedule
        rows = lm.key_identity_curve(alpha=1.0, K=1.0, eps_list=[1e-2, 1e-3, 1e-4, 1e-5])
        assert rows[-1].p_over_eps == pytest.approx(2 / math.pi, rel=2e-4)

    def test_exact_limit_subcritical(self):
        pl = lm.p_limit_subcritical(0.25)
        I = integrate.quad(lambda u: 1 / (1 - 0.5 * u ** 0.25) ** 2, 0, 1, epsabs=0, epsrel=1e-13)[0]
        assert pl == pytest.approx(2 / (8 + I + 2), rel=1e-12)
        assert lm.p_plus_quadrature(params(0.25, 1e-5), log_ratio=60.0) == pytest.approx(pl, rel=1e-6)

    def test_stated_subcritical_form(self):
        assert lm.p_limit_stated(0.25) == pytest.approx(1 / 11, rel=1e-15)

    def test_gamma(self):
        assert lm.skew_gamma(0.3, 0.3) == 0
        assert lm.skew_gamma(0.3, 0.0) == 1
        assert -1 < lm.skew_gamma(0.1, 0.7) < 1
        with pytest.raises(ParameterError):
            lm.skew_gamma(0.0, 0.0)


class TestStatedExamples:
    """Values quoted for the limits; the first three disagree with the exact quadrature (ledgered)."""

    def test_pbar_over_eps_alpha1(self):
        P = params(1.0, 1e-4, ratio=1e8)
        assert lm.p_plus_quadrature(P) / 1e-4 == pytest.approx(1 / math.pi, rel=0.02)

    def test_half_approach(self):
        rows = lm.key_identity_curve(alpha=0.5, K=4.0, eps_list=[1e-2, 1e-3, 1e-4],
                                     schedule=lm.Schedule.log_critical(4.0))
        assert rows[-1].p_over_eps == pytest.approx(1.0, rel=0.02)

    def test_quarter(self):
        P = params(0.25, 1e-5)
        assert lm.p_plus_quadrature(P, log_ratio=60.0) == pytest.approx(1 / 11, rel=0.02)

    def test_monotone_approach(self):
        rows = lm.key_identity_curve(alpha=1.0, K=1.0, eps_list=[1e-2, 1e-3, 1e-4])
        d = [abs(r.p_over_eps - rows[-1].p_over_eps) for r in rows]
        v = [r.p_over_eps for r in rows]
        assert np.all(np.diff(v) > 0) or np.all(np.diff(v) < 0)
        assert d[0] > d[1] > d[2]

    def test_degenerate_row(self):
        rows = lm.key_identity_curve([ModelParams(eps=0.01, kappa_eps=1.0, kappa_T=0.0)])
        assert rows[0].p_over_eps == pytest.approx(1 / (2 * 0.01), rel=1e-13)

    def test_curve_rejects_increasing(self):
        with pytest.raises(ParameterError):
            lm.key_identity_curve(alpha=1.0, eps_list=[1e-4, 1e-3])


class TestRegime:
    def test_hard(self):
        r = lm.classify_regime(1.0, lm.Schedule.power(1.0, -2.0))
        assert r.regime == lm.HARD
        assert r.beta_plus == pytest.approx(1 / math.pi, rel=1e-6)
        assert r.evidence["slope"] == pytest.approx(-2.0, rel=1e-12)

    def test_hard_K(self):
        r = lm.classify_regime(1.0, lm.Schedule.critical(1.0, 3.0))
        assert r.regime == lm.HARD and r.evidence["K_fit"] == pytest.approx(3.0, rel=1e-9)

    def test_half_log(self):
        r = lm.classify_regime(0.5, lm.Schedule.log_critical(4.0))
        assert r.regime == lm.HARD and r.beta_plus == pytest.approx(1.0, rel=1e-9)

    def test_brownian(self):
        assert lm.classify_regime(1.0, lambda e: 1 / e).regime == lm.BROWNIAN

    def test_nonpermeable(self):
        assert lm.classify_regime(1.0, lm.Schedule.power(1.0, -3.0)).regime == lm.NONPERMEABLE

    def test_skew_symmetric(self):
        r = lm.classify_regime(0.25, lambda e: e ** -2)
        assert r.regime == lm.SKEW and r.gamma == pytest.approx(0.0, abs=1e-12)
        assert r.beta_plus is None

    def test_non_divergent(self):
        with pytest.raises(lm.RegimeError):
            lm.classify_regime(1.0, lambda e: 0.5)
