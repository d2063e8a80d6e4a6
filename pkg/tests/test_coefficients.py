import math

import numpy as np
import pytest

from barrier_lab.coefficients import (
    CutoffProfile, DomainError, ModelParams, ParameterError, arctan_example_eval, chi_deriv,
    chi_eval, chibar2_deriv, chibar2_eval, chibar_eval, diffusivity, encode_profile,
)


def P(eps=0.1, alpha=1.0):
    return ModelParams(eps=eps, kappa_eps=0.01, kappa_T=0.1, alpha=alpha)


class TestModelParams:
    def test_separation(self):
        with pytest.raises(ParameterError, match="1/8"):
            ModelParams(eps=0.125, kappa_eps=0.1, kappa_T=0.1)

    def test_negative(self):
        with pytest.raises(ParameterError):
            ModelParams(eps=0.1, kappa_eps=-1.0, kappa_T=0.1)

    def test_both_zero(self):
        with pytest.raises(ParameterError):
            ModelParams(eps=0.1, kappa_eps=0.0, kappa_T=0.0)

    def test_scaling_law(self):
        p = ModelParams.scaling_law(0.01, K=2.0, kappa_T=0.1)
        assert p.kappa_eps == pytest.approx((2 * 0.01) ** 2 * 0.1, rel=1e-15)
        assert p.ratio == pytest.approx(1 / (2 * 0.01) ** 2)


class TestChi:
    def test_zero(self):
        assert chi_eval(CutoffProfile.piecewise_power(), P(), 0.0) == 0.0

    def test_at_eps(self):
        assert chi_eval(CutoffProfile.piecewise_power(), P(), 0.1) == pytest.approx(0.5, abs=1e-15)

    def test_plateau(self):
        assert chi_eval(CutoffProfile.piecewise_power(), P(alpha=2.0), 0.25) == 1.0

    def test_deriv_inner(self):
        assert chi_deriv(CutoffProfile.piecewise_power(), P(), 0.05) == pytest.approx(5.0, rel=1e-14)

    def test_deriv_plateau(self):
        assert chi_deriv(CutoffProfile.piecewise_power(), P(), 0.5) == 0.0

    def test_deriv_odd(self):
        prof = CutoffProfile.piecewise_power()
        assert chi_deriv(prof, P(alpha=2.0), -0.05) == -chi_deriv(prof, P(alpha=2.0), 0.05)

    def test_deriv_singular(self):
        with pytest.raises(DomainError):
            chi_deriv(CutoffProfile.piecewise_power(), P(alpha=0.5), 0.0)

    @pytest.mark.parametrize("alpha", [0.25, 0.5, 1.0, 2.0])
    def test_continuity_at_eps(self, alpha):
        prof, p = CutoffProfile.piecewise_power(), P(alpha=alpha)
        d = 1e-12
        assert abs(chi_eval(prof, p, 0.1 - d) - chi_eval(prof, p, 0.1 + d)) < 1e-9

    @pytest.mark.parametrize("alpha", [0.25, 1.0, 1.5])
    def test_deriv_vs_fd(self, alpha):
        prof, p = CutoffProfile.piecewise_power(), P(alpha=alpha)
        h = 1e-6
        for x in (0.03, 0.07, 0.13, 0.17, -0.06):
            fd = (chi_eval(prof, p, x + h) - chi_eval(prof, p, x - h)) / (2 * h)
            assert chi_deriv(prof, p, x) == pytest.approx(fd, rel=1e-6)

    def test_chibar_walls(self):
        for prof in (CutoffProfile.piecewise_power(), CutoffProfile.arctan_example(),
                     CutoffProfile.quadratic_barrier(boundary_layers=True)):
            assert chibar_eval(prof, P(), 1.0) == 0.0
            assert chibar_eval(prof, P(), -1.0) == 0.0

    def test_chibar_plateau(self):
        assert chibar_eval(CutoffProfile.piecewise_power(), P(), 0.5) == 1.0

    def test_no_layers(self):
        prof = CutoffProfile.piecewise_power(boundary_layers=False)
        assert chibar_eval(prof, P(), 1.0) == 1.0


class TestArctan:
    def test_zeros(self):
        assert arctan_example_eval(0.2, 0.0) == 0.0
        assert arctan_example_eval(0.2, 1.0) == 0.0

    def test_even(self):
        assert arctan_example_eval(0.2, -0.5) == pytest.approx(arctan_example_eval(0.2, 0.5), rel=1e-15)

    def test_square_of_chibar(self):
        prof = CutoffProfile.arctan_example(eps=0.2)
        xs = np.linspace(-1, 1, 101)
        assert np.allclose(chibar_eval(prof, None, xs) ** 2, arctan_example_eval(0.2, xs), rtol=1e-14, atol=1e-300)

    def test_closed_form_value(self):
        # (2/pi)^6 atan(x/eps)^2 atan(1e4 (x-1))^2 atan(1e4 (x+1))^2
        x = 0.3
        ref = (2 / math.pi) ** 6 * (math.atan(x / 0.2) * math.atan(1e4 * (x - 1)) * math.atan(1e4 * (x + 1))) ** 2
        assert arctan_example_eval(0.2, x) == pytest.approx(ref, rel=1e-14)

    def test_square_deriv_fd(self):
        prof = CutoffProfile.arctan_example(eps=0.2)
        h = 1e-6
        for x in (-0.7, -0.1, 0.05, 0.4):
            fd = (chibar2_eval(prof, None, x + h) - chibar2_eval(prof, None, x - h)) / (2 * h)
            assert chibar2_deriv(prof, None, x) == pytest.approx(fd, rel=1e-6)


class TestMisc:
    def test_constant(self):
        prof = CutoffProfile.constant(1.0)
        p = ModelParams(eps=0.1, kappa_eps=1.0, kappa_T=3.0)
        assert diffusivity(prof, p, 0.3) == 4.0

    def test_tabulated_roundtrip(self, tmp_path):
        xs = np.round(np.linspace(-1, 1, 41), 12)
        chi = np.where(np.abs(xs) >= 0.2, 1.0, np.abs(xs) / 0.2)
        f = tmp_path / "t.csv"
        f.write_text("x,chi\n" + "".join(f"{a:.17g},{b:.17g}\n" for a, b in zip(xs, chi)))
        prof = CutoffProfile.from_csv(f, eps=0.1, boundary_layers=False)
        assert chi_eval(prof, P(), 0.1) == pytest.approx(0.5, abs=1e-12)
        assert 0.0 <= chi_eval(prof, P(), 0.33) <= 1.0

    def test_unknown_kind(self):
        with pytest.raises(ParameterError):
            CutoffProfile("nope")

    def test_encode_shapes(self):
        code, p, tx, tc = encode_profile(CutoffProfile.arctan_example(), P())
        assert p.shape == (8,) and tc.shape[1] == 4
