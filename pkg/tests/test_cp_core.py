import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize

from hardy.cp_core import (
    ConstantEstimate,
    Method,
    algebraic_identity_residual,
    c1_objective,
    c1_polar,
    cp_lower_constant,
    cp_value,
    simplified_p2_residual,
)
from hardy.errors import DomainError, InvalidInputError

finite = st.floats(-50, 50, allow_nan=False)
complexes = st.builds(complex, finite, finite)
exponents = st.floats(1.05, 6.0)


def test_cp_zero_eta_is_zero():
    assert cp_value(3 + 1j, 0, 3) == 0.0


def test_cp_p2_is_abs_eta_squared():
    rng = np.random.default_rng(1)
    xi = rng.normal(size=500) + 1j * rng.normal(size=500)
    eta = rng.normal(size=500) + 1j * rng.normal(size=500)
    np.testing.assert_allclose(cp_value(xi, eta, 2), np.abs(eta) ** 2, rtol=1e-12, atol=1e-13)


def test_cp_at_xi_equals_eta():
    # last term vanishes, leaving |xi|^p
    assert cp_value(2 - 1j, 2 - 1j, 1.5) == pytest.approx(abs(2 - 1j) ** 1.5)


def test_cp_hand_value():
    # xi = 2, eta = 1, p = 3: 8 - 1 - 3*1*1 = 4
    assert cp_value(2.0, 1.0, 3) == pytest.approx(4.0)


def test_cp_rejects_bad_input():
    with pytest.raises(DomainError):
        cp_value(1, 1, 1.0)
    with pytest.raises(InvalidInputError):
        cp_value(np.nan, 1, 2)


@given(complexes, complexes, exponents)
@settings(max_examples=300)
def test_cp_nonnegative(xi, eta, p):
    assert cp_value(xi, eta, p) >= 0.0


@given(complexes, complexes, st.floats(1.1, 5), st.floats(0.01, 20))
@settings(max_examples=200)
def test_cp_homogeneous(xi, eta, p, lam):
    base = cp_value(xi, eta, p, clamp=False)
    scaled = cp_value(lam * xi, lam * eta, p, clamp=False)
    size = (abs(xi) + abs(eta)) ** p * lam**p
    assert abs(scaled - lam**p * base) <= 1e-11 * (size + 1e-300)


@given(complexes, complexes)
@settings(max_examples=200)
def test_cp_lower_bound_p3(xi, eta):
    c1 = cp_lower_constant(3).lower
    scale = abs(xi) ** 3 + abs(xi - eta) ** 3 + abs(eta) ** 3
    assert cp_value(xi, eta, 3) >= c1 * abs(eta) ** 3 - 1e-12 * scale


def test_c1_objective_matches_cp():
    # the ratio is C_p(1+z, z)/|z|^p with z = s + it, up to the rotation xi -> conj
    rng = np.random.default_rng(3)
    for p in (2.5, 3, 4):
        s, t = rng.normal(size=2)
        z = complex(s, t)
        direct = cp_value(1 + z, z, p) / abs(z) ** p
        assert c1_objective(s, t, p) == pytest.approx(direct, rel=1e-10)


def test_c1_polar_consistent():
    r, a = 0.7, 2.1
    assert c1_polar(r, a, 3) == pytest.approx(c1_objective(r * math.cos(a), r * math.sin(a), 3))


def test_c1_small_radius_series():
    # near the origin the ratio behaves like p/2 r^(2-p) -> must stay accurate
    p = 3.0
    s, t = 1e-7, 2e-7
    exact = mp.mpf(0)
    with mp.workdps(50):
        ss, tt = mp.mpf(s), mp.mpf(t)
        r2 = ss**2 + tt**2
        exact = ((r2 + 2 * ss + 1) ** (mp.mpf(p) / 2) - 1 - p * ss) / r2 ** (mp.mpf(p) / 2)
    assert c1_objective(s, t, p) == pytest.approx(float(exact), rel=1e-9)


def test_c1_two_is_closed_form():
    est = cp_lower_constant(2)
    assert est.method is Method.CLOSED_FORM
    assert est.value == est.lower == est.upper == 1.0
    searched = cp_lower_constant(2, method="search")
    assert searched.contains(1.0) or abs(searched.value - 1) < 1e-8


def test_c1_three_against_independent_search():
    est = cp_lower_constant(3, 1e-9)
    # oracle 1: dense grid over a box plus Nelder-Mead polish
    s = np.linspace(-4, 2, 1201)
    t = np.linspace(0, 3, 601)
    S, T = np.meshgrid(s, t)
    mask = S**2 + T**2 > 1e-6
    vals = np.where(mask, c1_objective(S, T, 3), np.inf)
    k = np.unravel_index(np.argmin(vals), vals.shape)
    res = optimize.minimize(lambda x: c1_objective(x[0], x[1], 3), [S[k], T[k]],
                            method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-15})
    assert est.lower <= res.fun + 1e-9
    assert est.upper >= res.fun - 1e-6
    # oracle 2: closed value 2 - sqrt(2), from minimising (|1-r|^3 - 1 + 3r)/r^3 by hand
    assert est.lower <= 2 - math.sqrt(2) <= est.upper + 1e-12


@pytest.mark.parametrize("p", [2.5, 3, 4, 6])
def test_c1_bracket_properties(p):
    est = cp_lower_constant(p, 1e-8)
    assert 0 < est.lower <= est.value <= est.upper <= 1
    assert est.width <= 1e-8
    # minimiser sits on the negative s-axis: a 1-D bounded search must agree
    line = optimize.minimize_scalar(lambda r: c1_objective(-r, 0.0, p), bounds=(1e-3, 50),
                                    method="bounded", options={"xatol": 1e-12})
    assert line.fun >= est.lower - 1e-9
    assert abs(line.fun - est.value) < 1e-7


def test_constant_estimate_validates():
    with pytest.raises(ValueError):
        ConstantEstimate(2.0, 0.0, 1.0, Method.BISECTION, 1)


def test_c1_rejects_small_p():
    with pytest.raises(DomainError):
        cp_lower_constant(1.5)


def _mp_identity(a, t, p):
    with mp.workdps(60):
        a = mp.mpc(a.real, a.imag)
        t = mp.mpf(t)
        p = mp.mpf(p)

        def cp(x, y):
            d = x - y
            if d == 0:
                return abs(x) ** p
            return abs(x) ** p - abs(d) ** p - p * abs(d) ** (p - 2) * mp.re(d * mp.conj(y))

        lhs = abs(a - t) ** p - (1 - t) ** (p - 1) * (abs(a) ** p - t)
        rhs = cp(a - t, t * (a - 1)) + t * (1 - t) ** (p - 1) * cp(1, 1 - a)
        return lhs - rhs


def test_algebraic_identity_extended_precision():
    # oracle check: the identity holds to 1e-50 at high precision, so it is exact
    rng = np.random.default_rng(9)
    for _ in range(20):
        a = complex(*rng.normal(size=2))
        t = rng.uniform()
        p = rng.uniform(1.2, 5)
        assert abs(_mp_identity(a, t, p)) < 1e-45
        res, scale = algebraic_identity_residual(a, t, p, extended=True)
        assert abs(res) <= 1e-12 * scale


@given(complexes, st.floats(0, 1), st.floats(1.1, 5))
@settings(max_examples=300)
def test_algebraic_identity_property(a, t, p):
    res, scale = algebraic_identity_residual(a, t, p, extended=True)
    assert abs(res) <= 1e-10 * max(scale, 1e-300)


def test_algebraic_identity_domain():
    with pytest.raises(DomainError):
        algebraic_identity_residual(1 + 1j, 1.5, 3)
    assert abs(algebraic_identity_residual(1 + 1j, 3.0, 2)) < 1e-12


@given(complexes, st.floats(-5, 5))
@settings(max_examples=300)
def test_simplified_p2(a, t):
    res, scale = simplified_p2_residual(a, t, extended=True)
    assert abs(res) <= 1e-12 * max(scale, 1e-300)
