import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hyperheat.geometry import LebesgueExponent, RankOneSpace
from hyperheat.specialfn import (
    c_function,
    complex_gamma,
    conn_coeff,
    hyp2f1_neg_axis,
    phi_rows,
    plancherel_density,
    reciprocal_gamma,
    second_kind_norm_const,
    second_kind_values,
    spherical_estimate_check,
    spherical_function,
)

H3 = RankOneSpace(2, 0)
H2 = RankOneSpace(1, 0)
CH2 = RankOneSpace(2, 1)
HH2 = RankOneSpace(4, 3)
SPACES = [H2, H3, CH2, HH2]


# ----------------------------------------------------------------- gamma

def _gamma_oracle(z, n_shift=60):
    """Slow independent reference: raise the argument, then Stirling."""
    z = complex(z)
    # reflection into Re z >= 0.5
    if z.real < 0.5:
        return math.pi / (math.sin(math.pi * z) if isinstance(z, float) else
                          np.sin(np.pi * z)) / _gamma_oracle(1.0 - z, n_shift)
    fac = 1.0 + 0.0j
    while z.real < n_shift:
        fac *= z
        z = z + 1.0
    # Stirling series for log Gamma
    B = [1 / 12, -1 / 360, 1 / 1260, -1 / 1680, 1 / 1188,
         -691 / 360360, 1 / 156, -3617 / 122400]
    s = (z - 0.5) * np.log(z) - z + 0.5 * math.log(2 * math.pi)
    zp = z
    for b in B:
        s += b / zp
        zp *= z * z
    return np.exp(s) / fac


def test_gamma_classical_values():
    assert complex_gamma(1.0) == pytest.approx(1.0, rel=1e-13)
    assert complex_gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-13)
    assert complex_gamma(5.0) == pytest.approx(24.0, rel=1e-13)


def test_gamma_spec_probe_point():
    # frozen from a 40-digit reference evaluation
    ref = -1.525828444181780299970166e-10 - 5.545273364437492197563915e-10j
    got = complex_gamma(0.5 + 14.13j)
    assert abs(got - ref) / abs(ref) < 1e-10


@settings(max_examples=120, deadline=None)
@given(st.floats(min_value=-40, max_value=40), st.floats(min_value=-35, max_value=35))
def test_gamma_vs_slow_oracle(x, y):
    z = complex(x, y)
    if abs(y) < 1e-6 and x < 0.5 and abs(x - round(x)) < 1e-3:
        return  # pole neighbourhood
    ref = _gamma_oracle(z)
    got = complex_gamma(z)
    assert abs(got - ref) <= 1e-11 * abs(ref)


def test_gamma_pole_rejected():
    with pytest.raises(ValueError):
        complex_gamma(0.0)
    with pytest.raises(ValueError):
        complex_gamma(-3.0)


def test_gamma_reflection_identity():
    # Gamma(z)Gamma(1-z) = pi/sin(pi z)
    for z in (0.3 + 2.2j, -1.7 + 0.4j, 2.5 - 3.0j):
        lhs = complex_gamma(z) * complex_gamma(1 - z)
        rhs = math.pi / np.sin(math.pi * z)
        assert abs(lhs - rhs) < 1e-12 * abs(rhs)


def test_reciprocal_gamma_zero_at_poles():
    assert reciprocal_gamma(0.0) == 0.0
    assert reciprocal_gamma(-2.0) == 0.0
    assert reciprocal_gamma(1.5) == pytest.approx(1.0 / complex_gamma(1.5))


def test_gamma_vectorized():
    zs = np.array([1.0, 0.5, 2.0 + 1.0j])
    vals = complex_gamma(zs)
    assert vals.shape == (3,)
    assert vals[0] == pytest.approx(1.0)


# ----------------------------------------------------------------- 2F1

def test_2f1_empty_series():
    assert hyp2f1_neg_axis(0.3 + 1j, 1.2, 1.5, 0.0) == pytest.approx(1.0)


def test_2f1_log_closed_form():
    # 2F1(1,1;2;z) = -log(1-z)/z at z = -1
    got = hyp2f1_neg_axis(1.0, 1.0, 2.0, -1.0)
    assert got.real == pytest.approx(0.6931471805599453, rel=1e-12)
    assert abs(got.imag) < 1e-13


def test_2f1_generic_complex_frozen():
    ref = 0.5941748657964023230305681 - 0.3553031885112857386319183j
    got = hyp2f1_neg_axis(0.3 + 0.7j, 1.1 - 0.2j, 1.9, -2.5)
    assert abs(got - ref) < 1e-11 * abs(ref)


def test_2f1_degenerate_parameter_separation():
    # b - a = 2 exactly: connection formula needs the regularized path
    ref = 0.1386185919540760339872366
    got = hyp2f1_neg_axis(0.5, 2.5, 1.75, -30.0)
    assert got.real == pytest.approx(ref, rel=1e-9)
    assert abs(got.imag) < 1e-10


def test_2f1_equal_parameters():
    # a = b (the other degenerate type), checked against r/sinh r on H3
    r = 5.0
    ref = r / math.sinh(r)
    got = hyp2f1_neg_axis(0.5, 0.5, 1.5, -math.sinh(r) ** 2)
    assert got.real == pytest.approx(ref, rel=1e-9)


def test_2f1_h3_spherical_closed_form():
    lam, r = 2.0, 3.0
    a, b = (1 + 1j * lam) / 2, (1 - 1j * lam) / 2
    got = hyp2f1_neg_axis(a, b, 1.5, -math.sinh(r) ** 2)
    ref = math.sin(lam * r) / (lam * math.sinh(r))
    assert got.real == pytest.approx(ref, rel=1e-11)


def test_2f1_branch_continuity():
    # Pfaff and connection branches must agree across the switch point
    lam = 1.3
    a, b, c = (1 + 1j * lam) / 2, (1 - 1j * lam) / 2, 1.5
    r_switch = math.atanh(math.sqrt(0.8))
    for dr in (-1e-3, 1e-3):
        r = r_switch + dr
        got = hyp2f1_neg_axis(a, b, c, -math.sinh(r) ** 2)
        ref = math.sin(lam * r) / (lam * math.sinh(r))
        assert got.real == pytest.approx(ref, rel=1e-10)


def test_2f1_rejects_bad_inputs():
    with pytest.raises(ValueError):
        hyp2f1_neg_axis(1.0, 1.0, 0.0, -1.0)
    with pytest.raises(ValueError):
        hyp2f1_neg_axis(1.0, 1.0, 2.0, 0.5)


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=0.05, max_value=9.0), st.floats(min_value=0.1, max_value=8.0))
def test_2f1_h3_oracle_property(lam, r):
    a, b = (1 + 1j * lam) / 2, (1 - 1j * lam) / 2
    got = hyp2f1_neg_axis(a, b, 1.5, -math.sinh(r) ** 2)
    ref = math.sin(lam * r) / (lam * math.sinh(r))
    assert got.real == pytest.approx(ref, rel=1e-9, abs=1e-13)


# ----------------------------------------------------------------- c-function

def test_c_at_minus_i_rho_is_one():
    for sp in SPACES:
        val = c_function(sp, -1j * sp.rho)
        assert abs(val - 1.0) < 1e-12


def test_c_conjugate_symmetry():
    for sp in SPACES:
        for lam in (1.0 + 0j, 0.7 - 0.3j, 3.0 - 1.0j, 5.5 - 0.01j):
            lhs = c_function(sp, -np.conj(lam))
            rhs = np.conj(c_function(sp, lam))
            assert abs(lhs - rhs) <= 1e-10 * abs(rhs)


def test_h3_density_exactly_quadratic():
    lams = np.array([0.5, 1.0, 5.0, 20.0])
    dens = plancherel_density(H3, lams)
    kappa = dens / lams ** 2
    assert np.max(np.abs(kappa - kappa[0])) < 1e-8 * kappa[0]
    # with the chosen normalization kappa is exactly 1
    assert kappa[0] == pytest.approx(1.0, rel=1e-10)


def test_density_global_growth_bracket():
    # |c|^-2 ~ lam^2 (1+lam)^(n-3) up to two-sided constants
    for sp in SPACES:
        lams = np.geomspace(0.01, 100.0, 80)
        ratio = plancherel_density(sp, lams) / (lams ** 2 * (1 + lams) ** (sp.dim_n - 3))
        assert np.max(ratio) / np.min(ratio) < 50.0


def test_density_even_and_zero_at_origin():
    assert plancherel_density(CH2, 0.0) == 0.0
    assert plancherel_density(CH2, -3.0) == pytest.approx(plancherel_density(CH2, 3.0), rel=1e-12)


def test_density_quadratic_vanishing():
    for sp in SPACES:
        r1 = plancherel_density(sp, 1e-3) / 1e-6
        r2 = plancherel_density(sp, 1e-4) / 1e-8
        assert r1 == pytest.approx(r2, rel=0.01)
        assert r1 > 0


# ----------------------------------------------------------------- phi

def test_phi_at_origin_is_one():
    for lam in (0.0, 1.0, 2.0 + 0.5j):
        for sp in (H3, CH2):
            assert abs(spherical_function(sp, lam, 0.0) - 1.0) < 1e-12


def test_phi_at_i_rho_identically_one():
    r = np.array([0.3, 1.0, 4.0, 15.0, 40.0])
    for sp in SPACES:
        for sign in (+1, -1):
            vals = spherical_function(sp, sign * 1j * sp.rho, r)
            assert np.max(np.abs(vals - 1.0)) < 1e-11


def test_phi_h3_closed_form():
    assert spherical_function(H3, 1.0, 2.0) == pytest.approx(
        math.sin(2.0) / math.sinh(2.0), rel=1e-11)
    lams = [0.2, 1.0, 2.0, 5.0, 10.0]
    rs = [0.1, 1.0, 3.0, 10.0, 25.0]
    for lam in lams:
        row = spherical_function(H3, lam, np.array(rs))
        ref = np.sin(lam * np.array(rs)) / (lam * np.sinh(np.array(rs)))
        assert np.max(np.abs(row - ref) / np.abs(ref)) < 1e-10


def test_phi_ch2_frozen_reference():
    ref = 0.03966622136576217348563714
    assert spherical_function(CH2, 1.3, 2.2) == pytest.approx(ref, rel=1e-11)


def test_phi_zero_lambda_richardson():
    # phi_0 on H3 equals r/sinh r; the lambda=0 row is the degenerate one
    r = np.array([0.5, 2.0, 10.0, 30.0])
    vals = spherical_function(H3, 0.0, r)
    ref = r / np.sinh(r)
    assert np.max(np.abs(vals - ref) / ref) < 1e-8


def test_phi_symmetry_in_lambda():
    r = np.linspace(0.1, 20, 25)
    for sp in (H3, CH2):
        for lam in (0.3, 1.7, 6.0, 0.9 + 0.4j):
            v1 = spherical_function(sp, lam, r)
            v2 = spherical_function(sp, -lam, r)
            assert np.max(np.abs(np.asarray(v1) - np.asarray(v2))) < 1e-10


def test_phi_bounded_by_one_on_strip():
    r = np.linspace(0.0, 40, 101)
    for sp in (H3, CH2):
        for lam in (0.25, 1.0, 4.0, 12.0):
            vals = spherical_function(sp, lam, r)
            assert np.max(np.abs(vals)) <= 1.0 + 1e-9


def test_phi_rows_matrix_matches_scalar():
    lams = np.array([0.31, 2.2, 7.7])
    r = np.linspace(0.05, 12, 40)
    mat = phi_rows(H3, lams, r)
    for i, lam in enumerate(lams):
        ref = np.sin(lam * r) / (lam * np.sinh(r))
        assert np.max(np.abs(mat[i] - ref)) < 1e-11


def test_second_kind_split_reconstructs_phi():
    r = np.array([2.0, 5.0, 12.0])
    for sp in (H3, CH2, HH2):
        for lam in (0.8, 3.3, 1.1 - 0.45j):
            lhs = (conn_coeff(sp, lam) * second_kind_values(sp, lam, r)
                   + conn_coeff(sp, -lam) * second_kind_values(sp, -lam, r))
            rhs = spherical_function(sp, lam, r)
            assert np.max(np.abs(lhs - np.asarray(rhs, complex))) < 1e-10 * max(
                1e-30, float(np.max(np.abs(rhs))))


def test_second_kind_norm_const_is_constant():
    for sp in SPACES:
        k1 = second_kind_norm_const(sp, probe=0.9)
        k2 = second_kind_norm_const(sp, probe=4.3)
        k3 = second_kind_norm_const(sp, probe=17.0)
        assert k1 == pytest.approx(k2, rel=1e-10)
        assert k1 == pytest.approx(k3, rel=1e-9)
        assert k1 > 0


# ----------------------------------------------------- spherical estimates

def test_estimate_p2_two_sided():
    lo, hi = spherical_estimate_check(H3, LebesgueExponent(2.0), 30.0)
    assert lo > 0
    assert hi / lo <= 10.0


def test_estimate_p1_trivial():
    lo, hi = spherical_estimate_check(CH2, LebesgueExponent(1.0), 30.0)
    assert hi <= 1.0 + 1e-9   # phi == 1 against (1+r)


def test_estimate_p_three_halves_bounded():
    lo, hi = spherical_estimate_check(CH2, LebesgueExponent(1.5), 30.0)
    assert np.isfinite(hi)
    assert hi < 20.0
