import math

import numpy as np
from hypothesis import given, settings, strategies as st

from barrier_lab import analytic1d as an
from barrier_lab import hitting as ht
from barrier_lab import limits as lm
from barrier_lab import spectral as sp
from barrier_lab.coefficients import CutoffProfile, ModelParams, chi_eval, chibar_eval
from barrier_lab.membrane import MCSummary
from barrier_lab.sdepath import exit_prob_exact

alphas = st.floats(0.1, 3.0)
epss = st.floats(1e-3, 0.12)
betas = st.floats(0.0, 1e6)
pos_betas = st.floats(1e-6, 1e6)
unit = st.floats(-1.0, 1.0)


@given(alphas, epss, unit)
def test_chi_bounds_even(alpha, eps, x):
    P = ModelParams(eps=eps, kappa_eps=1.0, kappa_T=1.0, alpha=alpha)
    prof = CutoffProfile.piecewise_power(alpha=alpha).resolve(P)
    c = float(chi_eval(prof, P, x))
    assert 0.0 <= c <= 1.0
    assert c == float(chi_eval(prof, P, -x))
    cb = float(chibar_eval(prof, P, x))
    assert 0.0 <= cb <= 1.0


@given(st.floats(-3, -0.01), st.floats(0.01, 3), st.floats(0.01, 1.0), st.sampled_from([-1, 1]),
       betas, betas)
def test_hitting_normalized(a, b, frac, side, bp, bm):
    x = side * frac * (b if side > 0 else -a)
    q = ht.HittingQuery(a, b, float(x), ht.MembraneParams(bp, bm))
    p = ht.hit_prob_membrane(q)
    assert 0.0 <= p <= 1.0
    assert abs(p + ht.hit_prob_membrane_complement(q) - 1.0) <= 1e-14


@given(pos_betas)
def test_interface_jump(beta):
    mp = ht.MembraneParams(beta, beta)
    d = (ht.hit_prob_membrane(ht.HittingQuery(-1, 1, "-0", mp))
         - ht.hit_prob_membrane(ht.HittingQuery(-1, 1, "+0", mp)))
    assert math.isclose(d, 1 / (2 * beta + 1), rel_tol=1e-12, abs_tol=1e-15)


@given(st.floats(1e-3, 1e3))
def test_reflected_mirror(beta):
    sol = ht.solve_reflected_system(beta)
    assert all(0 < v < 1 for v in sol.values())
    # forward error of the 4x4 solve scales with its condition number
    cond = np.linalg.cond(ht.reflected_system(beta)[0])
    assert abs(sol["0-"] + sol["0+"] - 1.0) <= 8 * np.finfo(float).eps * cond


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_gamma_range(p, q):
    if p + q == 0:
        return
    g = lm.skew_gamma(p, q)
    assert -1.0 <= g <= 1.0
    if p > 0 and q > 0 and 1e-15 < p / q < 1e15:
        # strictly inside while the ratio is resolvable in double precision
        assert -1.0 < g < 1.0


@settings(max_examples=30, deadline=None)
@given(alphas, st.floats(0.0, 40.0))
def test_pbar_in_unit_interval(alpha, L):
    P = ModelParams(eps=0.01, kappa_eps=1.0, kappa_T=1.0, alpha=alpha)
    p = lm.p_plus_quadrature(P, log_ratio=L)
    assert 0.0 < p < 1.0
    assert p <= 0.5 + 1e-15


@settings(max_examples=20, deadline=None)
@given(st.floats(-0.95, 0.95), st.floats(1e-3, 1.0))
def test_exit_prob_monotone(x, ke):
    P = ModelParams(eps=0.1, kappa_eps=ke, kappa_T=0.1)
    prof = CutoffProfile.arctan_example()
    p0 = exit_prob_exact(P, prof, x)
    p1 = exit_prob_exact(P, prof, min(x + 0.04, 1.0))
    assert 0.0 <= p1 <= p0 <= 1.0


@settings(max_examples=15, deadline=None)
@given(st.floats(1e-3, 1.0), st.floats(1e-3, 1.0), st.floats(0.01, 0.12))
def test_profile_monotone(ke, kt, eps):
    P = ModelParams(eps=eps, kappa_eps=ke, kappa_T=kt)
    prof = an.stationary_profile(P, CutoffProfile.arctan_example(), np.linspace(-1, 1, 41))
    assert np.all(np.diff(prof.temps) <= 0)
    assert prof.temps[0] == P.T_plus and prof.temps[-1] == 0.0


@given(st.lists(st.lists(st.integers(0, 1), min_size=1, max_size=20), min_size=3, max_size=3))
def test_merge_assoc_comm(groups):
    s = [MCSummary.from_values(g, 1, 0.1) for g in groups]
    a = s[0].merge(s[1]).merge(s[2])
    b = s[2].merge(s[0].merge(s[1]))
    assert a.n_paths == b.n_paths
    assert math.isclose(a.estimate, b.estimate, rel_tol=1e-15, abs_tol=1e-15)


@given(st.integers(1, 40))
def test_card_matches_enumeration(N):
    s = sp.build_index_set(N)
    assert s.card_pp == sp.card_pp(N)
    assert s.card == 4 * s.card_pp
