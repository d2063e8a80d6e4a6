import math

import numpy as np
import pytest

from barrier_lab import hitting as ht
from barrier_lab.coefficients import ParameterError

MP1 = ht.MembraneParams(1.0, 1.0)


def q(start, mp=MP1, a=-1.0, b=1.0):
    return ht.HittingQuery(a, b, start, mp)


class TestClosedForm:
    def test_plus(self):
        assert ht.hit_prob_membrane(q("+0")) == pytest.approx(1 / 3, rel=1e-15)

    def test_minus(self):
        assert ht.hit_prob_membrane(q("-0")) == pytest.approx(2 / 3, rel=1e-15)

    def test_impermeable(self):
        assert ht.hit_prob_membrane(q("-0", ht.MembraneParams(0.0, 0.0))) == 1.0

    def test_large_beta(self):
        big = ht.MembraneParams(1e12, 1e12)
        assert ht.hit_prob_membrane(q("+0", big)) == pytest.approx(0.5, rel=1e-11)
        assert ht.hit_prob_membrane(q("-0", big)) == pytest.approx(0.5, rel=1e-11)

    def test_ambiguous(self):
        with pytest.raises(ht.AmbiguousStart):
            ht.hit_prob_membrane(q(0.0))

    def test_bad_interval(self):
        with pytest.raises(ParameterError):
            q("+0", a=0.5)

    def test_interface_limits(self):
        mp = ht.MembraneParams(0.7, 2.5)
        for a, b in ((-1.0, 1.0), (-0.3, 2.0)):
            assert ht.hit_prob_membrane(q(1e-300, mp, a, b)) == pytest.approx(ht.hit_prob_membrane(q("+0", mp, a, b)), rel=1e-14)
            assert ht.hit_prob_membrane(q(-1e-300, mp, a, b)) == pytest.approx(ht.hit_prob_membrane(q("-0", mp, a, b)), rel=1e-14)

    def test_monotone_in_start(self):
        mp = ht.MembraneParams(0.4, 1.7)
        for side in (np.linspace(-1, -1e-6, 50), np.linspace(1e-6, 1, 50)):
            p = [ht.hit_prob_membrane(q(float(x), mp)) for x in side]
            assert np.all(np.diff(p) <= 1e-15)


class TestElastic:
    def test_values(self):
        assert ht.hit_prob_elastic(1.0, 0.0) == 1.0
        assert ht.hit_prob_elastic(1.0, 1.0) == 0.5
        assert ht.hit_prob_elastic(2.0, 3.0) == pytest.approx(1 / 7, rel=1e-15)

    def test_composition(self):
        # P_{0-}(tau_a < tau_{0+}) = 1/(1 - a beta_minus): elastic BM on the mirrored side
        for a, bm in ((-1.0, 1.0), (-0.4, 2.5), (-3.0, 0.2)):
            assert ht.hit_prob_elastic(-a, bm) == pytest.approx(1.0 / (1.0 - a * bm), rel=1e-15)


class TestExitLimit:
    def test_values(self):
        assert ht.exit_left_limit(-1.0, 3.0) == 1.0
        assert ht.exit_left_limit(0.5, 1.0) == pytest.approx(1 / 6, rel=1e-15)
        assert ht.exit_left_limit(-0.5, 1.0) == pytest.approx(5 / 6, rel=1e-15)


class TestReflected:
    def test_beta0(self):
        assert ht.hit_prob_reflected_system(ht.MembraneParams(0.0, 0.0), "0-") == 1.0

    def test_values_beta1(self):
        sol = ht.solve_reflected_system(1.0)
        assert [sol[s] for s in ht.REFLECTED_STATES] == pytest.approx([0.8, 0.6, 0.4, 0.2], rel=1e-14)

    @pytest.mark.parametrize("beta", [0.1, 0.5, 1.0, 2.0, 7.0])
    def test_mirror(self, beta):
        sol = ht.solve_reflected_system(beta)
        assert sol["0-"] == pytest.approx(1.0 - sol["0+"], rel=1e-14)
        assert sol["(-1)+"] == pytest.approx(1.0 - sol["1-"], rel=1e-14)

    @pytest.mark.parametrize("beta", np.logspace(-2, 2, 10))
    def test_absorbing_walls_reduce_to_closed_form(self, beta):
        sol = ht.solve_reflected_system(beta, walls="absorbing")
        mp = ht.MembraneParams(beta, beta)
        assert sol["0+"] == pytest.approx(ht.hit_prob_membrane(q("+0", mp)), rel=1e-13)
        assert sol["0-"] == pytest.approx(ht.hit_prob_membrane(q("-0", mp)), rel=1e-13)

    def test_closed_form_plus(self):
        # elimination gives P0+ = 1/(2 + p), p = 1/(1 + beta)
        for beta in (0.3, 1.0, 4.0):
            p = 1 / (1 + beta)
            assert ht.solve_reflected_system(beta)["0+"] == pytest.approx(1 / (2 + p), rel=1e-14)

    def test_asymmetric_rejected(self):
        with pytest.raises(ParameterError):
            ht.hit_prob_reflected_system(ht.MembraneParams(1.0, 2.0), "0+")
