import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cavitytherm.core import DomainError
from cavitytherm.specfun import (
    BranchValue,
    bessel_k2,
    cothm1,
    csch2,
    f_branch,
    g,
    g_derivs,
    h,
    h_branch,
    h_deriv,
)

mp.mp.dps = 50


def mp_g(v):
    v = mp.mpf(v)
    return mp.coth(v) - 1 / v


def mp_h(v):
    v = mp.mpf(v)
    return mp.diff(lambda x: mp_g(x) / x, v) / v


class TestG:
    def test_value_at_one(self):
        # independent high-precision evaluation of coth at 50 digits
        assert g(1.0) == pytest.approx(float(mp_g(1)), rel=1e-14)

    def test_small_v_limit(self):
        assert g(1e-6) / 1e-6 == pytest.approx(1.0 / 3.0, rel=1e-10)

    def test_large_v_asymptote(self):
        v = 25.0
        assert g(v) - (1.0 - 1.0 / v) == pytest.approx(2 * math.exp(-2 * v), rel=1e-6)

    @given(st.floats(1e-4, 50.0))
    def test_against_mpmath(self, v):
        assert g(v) == pytest.approx(float(mp_g(v)), rel=2e-13)

    def test_branch_agreement_around_switch(self):
        # series and closed form agree well inside the contract window
        for v in np.linspace(0.2, 0.45, 9):
            series = v * (1 / 3 - v**2 / 45 + 2 * v**4 / 945 - v**6 / 4725
                          + 2 * v**8 / 93555 - 1382 * v**10 / 638512875
                          + 4 * v**12 / 18243225)
            closed = 1.0 + float(cothm1(v)) - 1.0 / v
            assert series == pytest.approx(closed, rel=1e-12)
            assert g(v) == pytest.approx(closed, rel=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            g(0.0)
        with pytest.raises(DomainError):
            g(-1.0)


class TestDerivatives:
    def test_gp_small_v(self):
        gp, gpp, gppp = g_derivs(1e-5)
        assert gp == pytest.approx(1.0 / 3.0, rel=1e-9)
        assert gpp == pytest.approx(0.0, abs=1e-5)
        assert gppp == pytest.approx(-2.0 / 15.0, rel=1e-9)

    def test_gpp_large_v(self):
        v = 30.0
        _, gpp, _ = g_derivs(v)
        assert gpp * v**3 == pytest.approx(-2.0, rel=1e-10)

    @given(st.floats(0.01, 20.0))
    def test_gp_matches_finite_difference(self, v):
        step = max(1e-6, 1e-5 * v)
        fd = (g(v + step) - g(v - step)) / (2 * step)
        gp, _, _ = g_derivs(v)
        assert gp == pytest.approx(fd, rel=1e-7, abs=1e-12)

    @given(st.floats(0.01, 20.0))
    def test_gpp_matches_finite_difference(self, v):
        step = max(1e-5, 1e-4 * v)
        gp_p = g_derivs(v + step)[0]
        gp_m = g_derivs(v - step)[0]
        _, gpp, _ = g_derivs(v)
        assert gpp == pytest.approx((gp_p - gp_m) / (2 * step), rel=1e-6, abs=1e-10)

    @given(st.floats(0.05, 15.0))
    def test_gppp_matches_finite_difference(self, v):
        step = max(1e-4, 1e-4 * v)
        gpp_p = g_derivs(v + step)[1]
        gpp_m = g_derivs(v - step)[1]
        assert g_derivs(v)[2] == pytest.approx(
            (gpp_p - gpp_m) / (2 * step), rel=1e-6, abs=1e-9
        )


class TestH:
    def test_limit_at_zero(self):
        # term-wise derivative of the Laurent series of g/v
        assert h(1e-6) == pytest.approx(-2.0 / 45.0, rel=1e-12)

    def test_large_v(self):
        v = 40.0
        assert h(v) * v**3 == pytest.approx(-1.0 + 2.0 / v, rel=1e-9)

    @given(st.floats(0.02, 20.0))
    def test_matches_definition(self, v):
        step = max(1e-6, 1e-5 * v)
        fd = (g(v + step) / (v + step) - g(v - step) / (v - step)) / (2 * step)
        assert h(v) == pytest.approx(fd / v, rel=1e-7, abs=1e-12)

    @given(st.floats(0.02, 20.0))
    def test_h_deriv_matches_finite_difference(self, v):
        step = max(1e-6, 1e-5 * v)
        fd = (h(v + step) - h(v - step)) / (2 * step)
        assert h_deriv(v) == pytest.approx(fd, rel=1e-6, abs=1e-12)

    def test_against_mpmath(self):
        for v in (0.05, 0.29, 0.31, 1.7, 9.0):
            assert h(v) == pytest.approx(float(mp_h(v)), rel=1e-12)


class TestBranches:
    def test_f_small_v_k0(self):
        assert f_branch(1e-5, 0) == pytest.approx(1.0 / 3.0, rel=1e-9)

    def test_f_large_v_k1(self):
        # (1 - 1/v - 1)/v = -1/v^2 up to exponentially small terms
        v = 30.0
        target = float((mp_g(v) - 1) / v)
        assert f_branch(v, 1) == pytest.approx(target, rel=1e-13)
        assert f_branch(v, 1) * v**2 == pytest.approx(-1.0, rel=1e-1)

    def test_h_large_v_k1_asymptote(self):
        # verified against the 50-digit evaluation at v = 30
        v = 30.0
        target = float(mp_h(v) + 1 / mp.mpf(v) ** 3)
        assert h_branch(v, 1) == pytest.approx(target, rel=1e-12)
        assert h_branch(v, 1) * v**4 == pytest.approx(2.0, rel=1e-1)

    @given(st.floats(1e-3, 40.0))
    def test_linear_in_k(self, v):
        # f and h are exactly linear in K at fixed v (the K = +-1 pair
        # recombines to 2*K0 up to roundoff on the 1/v, 1/v^3 shifts)
        f0, fp, fm = f_branch(v, 0), f_branch(v, 1), f_branch(v, -1)
        assert fp + fm == pytest.approx(2 * f0, rel=1e-11, abs=4e-16 / v)
        assert f0 - fp == pytest.approx(1.0 / v, rel=1e-10)
        h0, hp, hm = h_branch(v, 0), h_branch(v, 1), h_branch(v, -1)
        assert hp + hm == pytest.approx(2 * h0, rel=1e-10, abs=1e-14 / v**3)
        assert hp - h0 == pytest.approx(1.0 / v**3, rel=1e-9)
        assert h0 - hm == pytest.approx(1.0 / v**3, rel=1e-9)

    def test_invalid_k(self):
        with pytest.raises(DomainError):
            f_branch(1.0, 2)
        with pytest.raises(DomainError):
            h_branch(1.0, 0.5)

    def test_branch_value_container(self):
        bv = BranchValue(value=1.5, K=1)
        assert bv.K == 1
        with pytest.raises(DomainError):
            BranchValue(value=0.0, K=3)


def _k2_series_recurrence(x):
    """Independent oracle: canonical K0/K1 series + upward recurrence
    K2 = K0 + 2 K1/x, evaluated at 50 digits."""
    x = mp.mpf(x)
    i0 = mp.mpf(1)
    term0 = mp.mpf(1)
    k0_sum = mp.mpf(0)
    hk = mp.mpf(0)
    for k in range(1, 80):
        term0 *= (x / 2) ** 2 / k**2
        hk += mp.mpf(1) / k
        k0_sum += term0 * hk
        i0 += term0
    k0 = -(mp.log(x / 2) + mp.euler) * i0 + k0_sum
    i1 = mp.mpf(0)
    s = mp.mpf(0)
    for k in range(0, 80):
        c = (x**2 / 4) ** k / (mp.factorial(k) * mp.factorial(k + 1))
        i1 += c
        s += (mp.digamma(k + 1) + mp.digamma(k + 2)) * c
    i1 *= x / 2
    k1 = 1 / x + mp.log(x / 2) * i1 - (x / 4) * s
    return k0 + 2 * k1 / x


class TestBesselK2:
    @pytest.mark.parametrize("x", [1e-3, 0.1, 1.0, 5.0, 50.0, 300.0, 700.0])
    def test_against_mpmath(self, x):
        assert bessel_k2(x) == pytest.approx(float(mp.besselk(2, x)), rel=1e-12)

    @pytest.mark.parametrize("x", [0.3, 1.0, 2.5])
    def test_series_recurrence_oracle(self, x):
        assert bessel_k2(x) == pytest.approx(float(_k2_series_recurrence(x)), rel=1e-12)

    def test_small_argument(self):
        x = 1e-4
        assert bessel_k2(x) == pytest.approx(2.0 / x**2, rel=1e-3)

    def test_exponential_range_edge(self):
        # accurate tiny value at 700, graceful underflow past the range
        val = bessel_k2(700.0)
        assert 0.0 < val < 1e-300
        assert bessel_k2(800.0) == 0.0

    def test_domain(self):
        with pytest.raises(DomainError):
            bessel_k2(0.0)
        with pytest.raises(DomainError):
            bessel_k2(-2.0)


@given(st.floats(0.05, 30.0))
def test_primitive_identities(v):
    assert 1.0 + float(cothm1(v)) == pytest.approx(1.0 / math.tanh(v), rel=1e-14)
    assert float(csch2(v)) == pytest.approx(1.0 / math.sinh(v) ** 2, rel=1e-13)
