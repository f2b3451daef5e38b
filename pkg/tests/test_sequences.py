import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from momentsum.errors import DegenerateFit, LcViolation
from momentsum.sequences import (
    GammaMoment,
    Gevrey,
    GevreyLog,
    PowerOf,
    Table,
    assoc_M_and_omega,
    floor_quotient_witness,
    regular_order_fit,
    sequence_from_literal,
    verify_srs,
)


def test_values():
    assert Gevrey(2)(3) == 36
    assert Gevrey(2).exact
    assert GammaMoment(2)(4) == 2


def test_gevrey_log_against_direct_product():
    with mpmath.workprec(200):
        want = 2 * mpmath.fprod(mpmath.log(mpmath.e + m) for m in range(3))
    got = GevreyLog(1, 1)(2)
    assert abs(got - want) < 1e-30
    assert abs(got - 4.0749058) < 1e-6


def test_gamma_moment_matches_gamma():
    g = GammaMoment(Fraction(3, 2))
    with mpmath.workprec(128):
        for p in range(10):
            assert abs(g(p) - mpmath.gamma(1 + mpmath.mpf(2 * p) / 3)) < 1e-30


def test_srs_gevrey1():
    c = verify_srs(Gevrey(1), 50)
    assert c.lc_ok
    assert c.A1 <= 2 and c.A2 <= 2
    assert c.C3[2] <= 2


@pytest.mark.parametrize("alpha", [1, 2, Fraction(1, 2)])
def test_dilation_constant_gevrey(alpha):
    c = verify_srs(Gevrey(alpha), 50)
    a = Fraction(alpha)
    for d, v in c.C3.items():
        assert v <= d ** (a.numerator / a.denominator) * (1 + 1e-12)


def test_lc_violation():
    with pytest.raises(LcViolation) as ei:
        verify_srs(Table([1, 2, 1, 5]), 4)
    assert ei.value.p == 2


def test_order_fit_exact_power():
    f = regular_order_fit(PowerOf(Gevrey(1), 2), Gevrey(1), 60)
    assert abs(f.s_hat - 2) < 1e-25
    assert abs(f.a - 1) < 1e-25 and abs(f.b - 1) < 1e-25


def test_order_fit_gamma_moment():
    f = regular_order_fit(GammaMoment(2), Gevrey(1), 60)
    assert abs(f.s_hat - 0.5) <= 0.05


def test_order_fit_degenerate():
    with pytest.raises(DegenerateFit):
        regular_order_fit(Table([1, 1, 1]), Gevrey(1), 60)


def test_floor_quotient():
    w = floor_quotient_witness(Gevrey(1), 1, 2, 40)
    assert w.C1 == 1 and w.D1 == 1
    assert w.holds(Gevrey(1))
    w = floor_quotient_witness(Gevrey(1), 2, 1, 40)
    for n in range(41):
        assert math.factorial(n) ** 2 <= w.C2 * w.D2**n * math.factorial(2 * n) * (1 + 1e-20)
    w = floor_quotient_witness(GevreyLog(1, 1), 1, 1, 20)
    assert w.C1 == w.D1 == w.C2 == w.D2 == 1


@pytest.mark.parametrize("p,q", [(p, q) for p in (1, 2, 3) for q in (1, 2, 3)])
def test_floor_quotient_grid(p, q):
    assert floor_quotient_witness(Gevrey(1), p, q, 40).holds(Gevrey(1))


def test_associated_function():
    grid = [0] + [10 ** (k / 10) for k in range(1, 31)]
    a = assoc_M_and_omega(Gevrey(1), grid, 3000)
    assert a.values[0] == 0
    assert abs(a.omega - 1) <= 0.1
    grid = [0] + [10 ** (k / 20) for k in range(1, 31)]
    a = assoc_M_and_omega(PowerOf(Gevrey(1), Fraction(1, 2)), grid, 3000)
    assert abs(a.omega - 0.5) <= 0.05


def test_literals_round_trip():
    for lit in ({"gevrey": 1}, {"gamma_moment": 2}, {"gevrey_log": [1, -1]}):
        h = sequence_from_literal(lit)
        assert sequence_from_literal(h.literal()) == h


@given(st.integers(1, 3), st.integers(1, 3), st.integers(2, 30))
def test_gevrey_lc_property(a_num, a_den, p):
    g = Gevrey(Fraction(a_num, a_den))
    assert g(p) ** 2 <= g(p - 1) * g(p + 1) * (1 + 1e-30)
