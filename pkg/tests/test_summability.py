import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from momentsum.dsl import ProblemSpec
from momentsum.errors import DirectionOutOfDomain, DomainGuard, RamifiedKernelRequired
from momentsum.sequences import Gevrey
from momentsum.series import TSeries
from momentsum.solver import solve_fixed_point
from momentsum.summability import (
    KernelSpec,
    borel_commutation_gap,
    growth_fit,
    kernel_moment_quad,
    laplace_sum,
    mittag_leffler,
    moment_borel,
    radius_estimate,
    series_function,
    summability_report,
)

HEAT = "u - (1) Dti[1] Dz[2] u = f"


def t_series(values):
    return TSeries.from_rows([[v] for v in values], len(values) - 1, 0)


@pytest.fixture(scope="module")
def heat_u():
    return solve_fixed_point(ProblemSpec.build(HEAT), 40, 6)


def test_borel_basic():
    u = t_series([math.factorial(p) for p in range(10)])
    assert all(c == 1 for c in moment_borel(u, Gevrey(1)).z_column(0))
    z = t_series([0] * 10)
    assert all(c == 0 for c in moment_borel(z, Gevrey(1)).z_column(0))


def test_borel_heat(heat_u):
    B = moment_borel(heat_u.z_part(0), Gevrey(1))
    assert [B.coefficient(p, 0) for p in range(41)] == [math.comb(2 * p, p) for p in range(41)]
    assert abs(radius_estimate(B, 0).radius - 0.25) <= 0.25 * 0.05


def test_borel_commutation(heat_u):
    # m_e = p!, m_e^2 = (p!)^2: exact commutation
    assert borel_commutation_gap(heat_u.z_part(0), Gevrey(1), Gevrey(2)) == 0


@pytest.mark.parametrize("ratio,want", [(1, 1.0), (2, 0.5), (Fraction(1, 3), 3.0)])
def test_radius_geometric(ratio, want):
    r = radius_estimate([Fraction(ratio) ** p for p in range(40)])
    assert r.regime == "geometric"
    assert abs(r.radius - want) <= 0.05 * want


def test_radius_superfactorial():
    assert radius_estimate([math.factorial(p) for p in range(40)]).radius == 0
    assert radius_estimate([Fraction(1, math.factorial(p)) for p in range(40)]).radius == math.inf


def test_growth_fit_models():
    g = Gevrey(1)
    fit = growth_fit([mpmath.sqrt(mpmath.factorial(p)) for p in range(41)], g)
    assert abs(fit.s_hat - 0.5) < 1e-9 and fit.rms < 1e-9
    fit = growth_fit([1 / mpmath.factorial(p) for p in range(41)], g)
    assert abs(fit.s_hat + 1) < 1e-9


def test_growth_fit_heat(heat_u):
    fit = growth_fit(heat_u.z_column(0), Gevrey(1))
    assert abs(fit.s_hat - 1) <= 0.05
    assert fit.window == (10, 40)


def test_mittag_leffler():
    assert abs(mittag_leffler(1, 1) - mpmath.e) < 1e-12
    assert mittag_leffler(Fraction(3, 7), 0) == 1
    assert abs(mittag_leffler(2, 1) - mpmath.cosh(1)) < 1e-12
    with pytest.raises(DomainGuard):
        mittag_leffler(1, -60)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_kernel_moments(k):
    for p in range(9):
        want = mpmath.gamma(1 + mpmath.mpf(p) / k)
        assert abs(kernel_moment_quad(k, p) / want - 1) < 1e-10


def test_kernel_spec():
    ker = KernelSpec(2)
    assert ker.omega_bar() == Fraction(1, 2)
    assert ker.e(0) == 0
    assert abs(ker.m_e(4) - 2) < 1e-30


def test_laplace():
    one = laplace_sum(lambda u: mpmath.mpf(1), 1, 0, 0.3).value
    assert abs(one - 1) < 1e-6
    lin = laplace_sum(lambda u: u, 1, 0, 0.3).value
    assert abs(lin - 0.3) < 1e-6
    geo = laplace_sum(mpmath.exp, 1, 0, 0.3).value
    assert abs(geo - 1 / (1 - mpmath.mpf("0.3"))) < 1e-6
    with pytest.raises(DirectionOutOfDomain):
        laplace_sum(mpmath.exp, 1, mpmath.pi, 0.3)


def test_laplace_of_borel_series():
    # Borel transform of sum p! t^p with m_e = p! is 1/(1-u); Laplace gives it back below the pole
    phi = series_function([1] * 60)
    val = laplace_sum(phi, 2, 0, mpmath.mpf("0.1")).value
    direct = mpmath.nsum(lambda p: mpmath.gamma(1 + p / 2) * mpmath.mpf("0.1") ** p, [0, 40])
    assert abs(val - direct) < 1e-4


@settings(max_examples=15)
@given(st.floats(0.05, 0.9), st.floats(-0.7, 0.7))
def test_laplace_constant_property(r, theta):
    z = mpmath.mpf(r) * mpmath.expj(theta)
    assert abs(laplace_sum(lambda u: mpmath.mpf(1), 1, 0, z).value - 1) < 1e-6


def test_report_heat():
    rep = summability_report(ProblemSpec.build(HEAT, nt=40, nz=10))
    assert rep.k == 1
    g0 = next(g for g in rep.growth if g["z_index"] == 0)
    assert g0["status"] == "sharp"
    assert abs(rep.borel["z0"]["radius"] - 0.25) < 0.0125
    assert all(c["ok"] for c in rep.laplace_checks)


def test_report_invalid_spec():
    rep = summability_report(ProblemSpec.build("u - (z) Dti[1] Dz[2] u = f"))
    assert {f.code for f in rep.findings} >= {"NotAUnit"}
    assert rep.growth == [] and rep.k is None


def test_ramified_kernel():
    # base sequence of index 3 pushes the kernel index past 2
    spec = ProblemSpec.build(HEAT, m1=Gevrey(3), m2=Gevrey(3), base=Gevrey(3), nt=10, nz=4)
    rep = summability_report(spec)
    assert any(isinstance(e, RamifiedKernelRequired) for e in rep.errors)
    assert rep.kernel_k is None
