import math
import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_spec
from momentsum.dsl import ProblemSpec
from momentsum.errors import SearchBudgetExceeded, ValidationFailed
from momentsum.sequences import Gevrey
from momentsum.series import TSeries, moment_deriv, moment_integral
from momentsum.solver import (
    build_g,
    estimate_constants,
    estimate_F,
    majorant_Pp,
    reconstruction_gap,
    residual,
    solve_all,
    solve_fixed_point,
    w_bound_margin,
    w_sequence,
)

HEAT = "u - (1) Dti[1] Dz[2] u = f"
EXP = "u - (1/2) Dti[1] u = f"


@pytest.fixture(scope="module")
def heat():
    return ProblemSpec.build(HEAT)


@pytest.fixture(scope="module")
def heat_solution(heat):
    return solve_fixed_point(heat, 24, 30, padded=True)


def test_heat_coefficients(heat):
    u = solve_fixed_point(heat, 20, 10)
    for p in range(21):
        assert u.coefficient(p, 0) == Fraction(math.factorial(2 * p), math.factorial(p))
    # direct term formula: d_t^{-p} d_z^{2p} of sum z^n at z^j is (2p+j)!/(j! p!)
    for p in range(6):
        for j in range(6):
            want = Fraction(math.factorial(2 * p + j), math.factorial(j) * math.factorial(p))
            assert u.coefficient(p, j) == want


def test_exp_solution():
    spec = ProblemSpec.build(EXP, f={"t_poly": [[1]]})
    u = solve_fixed_point(spec, 12, 4)
    for p in range(13):
        assert u.coefficient(p, 0) == Fraction(1, 2) ** p / math.factorial(p)


def test_zero_forcing():
    spec = ProblemSpec.build(HEAT, f={"t_poly": [[0]]})
    u = solve_fixed_point(spec, 8, 6)
    assert all(c == 0 for row in u for c in row.coeffs)


@pytest.mark.parametrize("method", ["triangular", "neumann"])
@pytest.mark.parametrize("exact", [True, False])
def test_residual_small(heat, method, exact):
    u = solve_fixed_point(heat, 10, 8, method=method, exact=exact, padded=True)
    res = residual(heat, u, 8)
    if exact:
        assert res.norm == 0
    assert res.scaled <= res.tolerance


def test_methods_agree(heat):
    a = solve_fixed_point(heat, 10, 6, method="triangular")
    b = solve_fixed_point(heat, 10, 6, method="neumann")
    assert a == b


def test_residual_detects_perturbation(heat):
    u = solve_fixed_point(heat, 6, 6, padded=True)
    bump = TSeries.from_rows([[0], [0], [0, Fraction(1, 10**6)]], u.N_t, u.N_z)
    assert residual(heat, u + bump).norm >= 1e-7


def test_zero_operator():
    spec = ProblemSpec.build("u - (0) Dti[1] Dz[1] u = f")
    u = solve_fixed_point(spec, 5, 5, padded=True)
    assert residual(spec, u).norm == 0
    f = spec.f_series(5, u.N_z)
    assert all(u.coefficient(n, j) == f.coefficient(n, j) for n in range(6) for j in range(6))


def test_strict_mode():
    spec = ProblemSpec.build(EXP)
    solve_fixed_point(spec, 4, 4)
    with pytest.raises(ValidationFailed):
        solve_fixed_point(spec, 4, 4, strict=True)


def test_g_zero_when_f_zero():
    spec = ProblemSpec.build(HEAT, f={"t_poly": [[0]]})
    g = build_g(spec, solve_fixed_point(spec, 6, 6, padded=True))
    assert all(c == 0 for row in g for c in row.coeffs)


def test_g_heat_termwise(heat, heat_solution):
    u = heat_solution
    g = build_g(heat, u)
    for n in range(10):
        for j in range(10):
            # only z^0, z^1 survive in S, and d_z^2 kills them
            want = (u[n][j] if j < 2 else 0) - (1 if n == 0 else 0)
            assert g[n][j] == want


def test_w_recursion(heat, heat_solution):
    g = build_g(heat, heat_solution)
    w = w_sequence(heat, g, 3)
    assert w[0] is g
    m = Gevrey(1)
    # single-term operator: w_1 = d_t d_z^{-2} g
    w1 = moment_integral(moment_deriv(g, m, "t", 1), m, "z", 2, truncate=True)
    assert w[1] == w1


def test_reconstruction(heat, heat_solution):
    w = w_sequence(heat, build_g(heat, heat_solution), 12)
    gap, n_max, j_max = reconstruction_gap(heat, heat_solution, w)
    assert gap == 0
    assert n_max >= 10 and j_max == 14


def test_P1(heat):
    P = majorant_Pp(heat, 2)
    assert P[0].coeffs[0] == 1
    assert P[1].coeffs[:3] == (0, Fraction(1, 2), Fraction(3, 4))


def test_F_stable(heat):
    Fs = [estimate_F(heat, majorant_Pp(heat, P))[0] for P in (10, 12, 14)]
    assert all(mpmath.isfinite(F) for F in Fs)
    assert max(Fs) / min(Fs) <= 1.1


def test_constants(heat, heat_solution):
    w = w_sequence(heat, build_g(heat, heat_solution), 8)
    P = majorant_Pp(heat, 8)
    c = estimate_constants(heat, w, P, 12)
    assert c.verified and not c.at_boundary
    assert w_bound_margin(heat, w, P, 12, c) >= 1 - 1e-20


def test_constants_search_edge(heat, heat_solution):
    w = w_sequence(heat, build_g(heat, heat_solution), 4)
    P = majorant_Pp(heat, 4)
    with pytest.raises(SearchBudgetExceeded):
        estimate_constants(heat, w, P, 8, grid_steps=0)


def test_solve_all(heat):
    art = solve_all(heat, 16, 8, 6)
    assert art.residual_norm == 0
    assert art.reconstruction[0] == 0
    assert art.constants is not None and not art.errors


@settings(max_examples=15)
@given(st.integers(0, 2**32 - 1))
def test_random_specs_solve_exactly(seed):
    spec = random_spec(random.Random(seed))
    u = solve_fixed_point(spec, 6, 4, padded=True)
    assert residual(spec, u, 4).norm == 0
