from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from momentsum.errors import NotAUnit, ProfileMismatch, RadiusOutOfRange
from momentsum.sequences import GammaMoment, Gevrey
from momentsum.series import (
    TSeries,
    ZSeries,
    moment_deriv,
    moment_integral,
    norm_rtilde,
    ps_invert_unit,
)

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=7)


def test_product_and_identity():
    assert (ZSeries([1, 1, 0]) * ZSeries([1, -1, 0])).coeffs == (1, 0, -1)
    f = ZSeries([1, 2, 3])
    assert f + ZSeries.zeros(2) == f


def test_convolution_of_ones():
    ones = ZSeries([1] * 5)
    assert (ones * ones).coeffs == (1, 2, 3, 4, 5)


def test_invert():
    assert ps_invert_unit(ZSeries([1, -1, 0, 0, 0])).coeffs == (1,) * 5
    assert ps_invert_unit(ZSeries([2])).coeffs == (Fraction(1, 2),)
    assert ps_invert_unit(ZSeries([1, 1, 1, 0, 0, 0, 0])).coeffs == (1, -1, 0, 1, -1, 0, 1)
    with pytest.raises(NotAUnit):
        ps_invert_unit(ZSeries([0, 1]))


def test_moment_derivative():
    assert moment_deriv(ZSeries([0, 0, 0, 1]), Gevrey(1)).coeffs[:3] == (0, 0, 3)
    d = moment_deriv(ZSeries([0, 0, 1]), GammaMoment(2))
    with mpmath.workprec(128):
        assert abs(d[1] - 2 / mpmath.sqrt(mpmath.pi)) < 1e-30
    f = ZSeries([1, 2, 3])
    assert moment_deriv(f, Gevrey(1), q=0) == f


def test_moment_integral():
    assert moment_integral(ZSeries([0, 0, 1, 0]), Gevrey(1)).coeffs == (0, 0, 0, Fraction(1, 3))
    f = ZSeries([1, 2, 3])
    assert moment_integral(f, Gevrey(1), i=0) == f
    g = moment_integral(ZSeries([1, 0, 0]), GammaMoment(2), i=2)
    assert abs(g[2] - 1) < 1e-30


def test_t_axis():
    t = TSeries.from_rows([[1, 2], [3]], 2, 3)
    assert moment_integral(t, Gevrey(1), "t", 1).coefficient(2, 0) == Fraction(3, 2)


def test_norm():
    assert norm_rtilde(ZSeries([1, 2]), Fraction(1, 2)) == 2
    assert norm_rtilde(ZSeries([0]), Fraction(1, 2)) == 0
    assert abs(norm_rtilde(ZSeries([1] * 11), Fraction(1, 2)) - (2 - Fraction(1, 1024))) < 1e-30
    with pytest.raises(RadiusOutOfRange):
        norm_rtilde(ZSeries([1]), 1)


def test_profile_mismatch():
    with pytest.raises(ProfileMismatch):
        ZSeries([1, 2]).inexact() + ZSeries([1, 2, 3]).inexact(200)


@given(st.integers(2, 7).flatmap(lambda n: st.tuples(st.lists(rationals, min_size=n, max_size=n),
                                                        st.lists(rationals, min_size=n, max_size=n))))
def test_mul_commutes(ab):
    a, b = ab
    assert ZSeries(a) * ZSeries(b) == ZSeries(b) * ZSeries(a)


@given(st.lists(rationals, min_size=2, max_size=8), st.fractions(min_value=1, max_value=4, max_denominator=3))
def test_inverse_property(tail, lead):
    a = ZSeries([lead] + tail)
    prod = a * ps_invert_unit(a)
    assert prod.coeffs[0] == 1 and all(c == 0 for c in prod.coeffs[1:])


@given(st.lists(rationals, min_size=4, max_size=8), st.integers(1, 3))
def test_deriv_inverts_integral(coeffs, i):
    m = Gevrey(1)
    f = ZSeries(coeffs + [0] * i)
    back = moment_deriv(moment_integral(f, m, i=i), m, q=i)
    assert back.coeffs[: len(coeffs)] == tuple(coeffs)


@given(st.lists(rationals, min_size=1, max_size=8), st.fractions(min_value=0, max_value=Fraction(9, 10)))
def test_norm_dominates_value(coeffs, rt):
    f = ZSeries(coeffs)
    assert abs(f.evaluate(rt)) <= norm_rtilde(f, rt) * (1 + 1e-30) + 1e-30
