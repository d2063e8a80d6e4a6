import math

import numpy as np
import pytest
from scipy import integrate as sint

from barrier_lab import quadrature as quad


def test_polynomial_exact():
    assert quad.integrate(lambda x: x ** 5 - 3 * x ** 2, -1.0, 2.0) == pytest.approx(10.5 - 9.0, rel=1e-14)


def test_reversed_limits():
    f = np.exp
    assert quad.integrate(f, 1.0, 0.0) == pytest.approx(-(math.e - 1.0), rel=1e-14)


def test_narrow_spike_vs_closed_form():
    w = 1e-6
    f = lambda x: 1.0 / (w * w + x * x)
    ref = 2.0 * math.atan(1.0 / w) / w
    assert quad.integrate(f, -1.0, 1.0, focus=(0.0,), rtol=1e-12) == pytest.approx(ref, rel=1e-10)


def test_vs_scipy_kink():
    f = lambda x: np.abs(x - 0.3) ** 0.5 + np.where(x > 0.6, 1.0, 0.0)
    ref = sint.quad(lambda x: abs(x - 0.3) ** 0.5 + (1.0 if x > 0.6 else 0.0), 0, 1, points=[0.3, 0.6],
                    epsabs=0, epsrel=1e-13)[0]
    assert quad.integrate(f, 0.0, 1.0, focus=(0.3,), points=(0.6,), rtol=1e-12) == pytest.approx(ref, rel=1e-10)


def test_cumulative_matches_pointwise():
    grid = np.linspace(0, 2, 9)
    run, _ = quad.cumulative(np.cos, grid, rtol=1e-12)
    assert np.allclose(run, np.sin(grid), rtol=0, atol=1e-13)


def test_panel_cap_raises():
    f = lambda x: np.sin(1e7 * x) / (1e-12 + np.abs(x))
    with pytest.raises(quad.QuadratureError) as exc:
        quad.integrate(f, -1.0, 1.0, rtol=1e-14, max_panels=64)
    assert exc.value.achieved > 0
