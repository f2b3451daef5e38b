"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import math
import random
import time
from fractions import Fraction

import mpmath
import pytest

from helpers import random_spec
from momentsum.dsl import ProblemSpec, closed_form_inv_k, has_errors, newton_polygon, slope_k, validate_spec
from momentsum.fractional import FracSeries, frac_correspondence_check, rl_integral
from momentsum.sequences import Gevrey, floor_quotient_witness, verify_srs
from momentsum.series import ZSeries
from momentsum.solver import (
    build_g,
    estimate_constants,
    estimate_F,
    majorant_Pp,
    reconstruction_gap,
    residual,
    solve_fixed_point,
    w_bound_margin,
    w_sequence,
)
from momentsum.summability import (
    growth_fit,
    kernel_moment_quad,
    laplace_sum,
    mittag_leffler,
    moment_borel,
    radius_estimate,
)

HEAT = "u - (1) Dti[1] Dz[2] u = f"
EXP = "u - (1/2) Dti[1] u = f"


@pytest.fixture(scope="module")
def heat():
    return ProblemSpec.build(HEAT)


def test_c1_polygon_slope(criterion):
    rng = random.Random(20240611)
    specs = [random_spec(rng) for _ in range(120)]
    for s in specs:
        assert not has_errors([f for f in validate_spec(s) if f.code != "LcViolation"])
    t = time.perf_counter()
    mismatches = 0
    for s in specs:
        op = s.operator
        k = slope_k(newton_polygon(s), s)
        if 1 / k != closed_form_inv_k(op.kappa, op.p_kappa, s.s1, s.s2):
            mismatches += 1
    elapsed = time.perf_counter() - t
    worked = ProblemSpec.build("u - (1) Dti[2] Dz[3] u - (z) Dti[1] Dz[1] u = f")
    k2 = slope_k(newton_polygon(worked), worked)
    ok = mismatches == 0 and elapsed < 1 and k2 == 2
    criterion(1, ok, f"{len(specs)} random specs, {mismatches} mismatches, {elapsed:.3f}s; worked k = {k2}")
    assert ok


def test_c2_formal_solution(criterion):
    t = time.perf_counter()
    details = []
    ok = True
    for eq, f in ((HEAT, {"geometric_z": {}}), (EXP, {"t_poly": [[1]]})):
        spec = ProblemSpec.build(eq, f=f)
        for exact in (True, False):
            u = solve_fixed_point(spec, 40, 20, exact=exact, padded=True)
            res = residual(spec, u, 20)
            good = res.norm == 0 if exact else res.scaled <= res.tolerance
            ok &= good
            details.append(f"{'exact' if exact else 'mp'}:{mpmath.nstr(res.scaled, 3)}")
    elapsed = time.perf_counter() - t
    ok &= elapsed < 10
    criterion(2, ok, f"(40,20) relative residuals {' '.join(details)}, tol 10 eps; {elapsed:.2f}s")
    assert ok


def test_c3_growth_order(heat, criterion):
    u = solve_fixed_point(heat, 40, 4)
    col = u.z_column(0)
    assert all(col[p] == Fraction(math.factorial(2 * p), math.factorial(p)) for p in range(41))
    k = slope_k(newton_polygon(heat), heat)
    fit = growth_fit(col, Gevrey(1))
    ok = abs(fit.s_hat - 1 / k) <= 0.05
    criterion(3, ok, f"s_hat = {fit.s_hat:.4f} on p in {list(fit.window)}, 1/k = {1 / k}")
    assert ok


def test_c4_borel(heat, criterion):
    u = solve_fixed_point(heat, 40, 4)
    B = moment_borel(u.z_part(0), Gevrey(1))
    binom = all(B.coefficient(p, 0) == math.comb(2 * p, p) for p in range(41))
    r = radius_estimate(B, 0).radius
    ok = binom and abs(r - 0.25) <= 0.25 * 0.05
    criterion(4, ok, f"binom(2p,p) coefficients: {binom}; radius {r:.5f}")
    assert ok


def test_c5_fractional(criterion):
    with mpmath.workprec(128):
        v = rl_integral(FracSeries(Fraction(1, 2), [0, 0, 1], prec=128), Fraction(1, 2)).coeffs[3]
        want = 4 / (3 * mpmath.sqrt(mpmath.pi))
        rel = abs(v - want) / want
    rng = random.Random(7)
    gaps = {}
    for k in (1, 2, 3):
        coeffs = [Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(14)]
        gaps[k] = frac_correspondence_check(k, ZSeries(coeffs, prec=128), 12)
    ok = rel < 1e-20 and all(g <= 1e-30 for g in gaps.values())
    criterion(5, ok, f"I^(1/2) z rel err {mpmath.nstr(rel, 3)}; correspondence gaps "
                     + ", ".join(f"k={k}: {mpmath.nstr(g, 3)}" for k, g in gaps.items()))
    assert ok


def test_c6_kernel_laplace(criterion):
    worst = max(abs(kernel_moment_quad(k, p) / mpmath.gamma(1 + mpmath.mpf(p) / k) - 1)
                for k in (1, 2, 3) for p in range(9))
    lap = laplace_sum(mpmath.exp, 1, 0, mpmath.mpf("0.3")).value
    lap_err = abs(lap - 1 / (1 - mpmath.mpf("0.3")))
    ml_err = max(abs(mittag_leffler(1, 1) - mpmath.e), abs(mittag_leffler(2, 1) - mpmath.cosh(1)))
    ok = worst < 1e-10 and lap_err < 1e-6 and ml_err < 1e-12
    criterion(6, ok, f"moment rel err {mpmath.nstr(worst, 3)}; Laplace err {mpmath.nstr(lap_err, 3)}; "
                     f"Mittag-Leffler err {mpmath.nstr(ml_err, 3)}")
    assert ok


def test_c7_sequences(criterion):
    c = verify_srs(Gevrey(1), 50)
    ok = c.lc_ok and c.A1 <= 2 and c.A2 <= 2
    dil = True
    for alpha in (Fraction(1, 2), 1, 2):
        cert = verify_srs(Gevrey(alpha), 50)
        a = Fraction(alpha)
        dil &= all(v <= d ** (a.numerator / a.denominator) * (1 + 1e-12) for d, v in cert.C3.items())
    witnesses = all(floor_quotient_witness(Gevrey(1), p, q, 40).holds(Gevrey(1))
                    for p in (1, 2, 3) for q in (1, 2, 3))
    ok = ok and dil and witnesses
    criterion(7, ok, f"A1 = {mpmath.nstr(c.A1, 5)}, A2 = {mpmath.nstr(c.A2, 5)}, C3(d) <= d^alpha: {dil}, "
                     f"floor-quotient witnesses: {witnesses}")
    assert ok


def test_c8_majorants(heat, criterion):
    P = majorant_Pp(heat, 12)
    p1 = P[1].coeffs[:3] == (0, Fraction(1, 2), Fraction(3, 4)) and all(c == 0 for c in P[1].coeffs[3:])
    Fs = [estimate_F(heat, majorant_Pp(heat, depth))[0] for depth in (8, 10, 12)]
    drift = max(Fs) / min(Fs) - 1
    u = solve_fixed_point(heat, 24, 30, padded=True)
    w = w_sequence(heat, build_g(heat, u), 8)
    consts = estimate_constants(heat, w, P[:9], 12)
    margin = w_bound_margin(heat, w, P[:9], 12, consts)
    ok = p1 and all(mpmath.isfinite(F) for F in Fs) and drift <= 0.10 and consts.verified and margin >= 1 - 1e-20
    criterion(8, ok, f"P_1 ok: {p1}; F over depth 8/10/12 = {[mpmath.nstr(F, 5) for F in Fs]} "
                     f"(drift {mpmath.nstr(drift, 3)}); constants B'={mpmath.nstr(consts.B, 4)} "
                     f"C'={mpmath.nstr(consts.C, 4)} K'={mpmath.nstr(consts.K, 4)}, margin {mpmath.nstr(margin, 4)}")
    assert ok


def test_c9_reconstruction(heat, criterion):
    u = solve_fixed_point(heat, 24, 30, padded=True)
    w = w_sequence(heat, build_g(heat, u), 12)
    gap, n_max, j_max = reconstruction_gap(heat, u, w)
    ok = gap == 0 and n_max >= 10
    criterion(9, ok, f"P = 12, max gap {gap} over t^n, n <= {n_max}, z^j, j <= {j_max}")
    assert ok
