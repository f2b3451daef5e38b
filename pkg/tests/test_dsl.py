from fractions import Fraction

import pytest

from momentsum.dsl import (
    ProblemSpec,
    format_equation,
    has_errors,
    load_problem,
    parse_equation,
    parse_problem,
    validate_spec,
)
from momentsum.errors import SemanticError, SpecSyntaxError
from momentsum.sequences import GammaMoment, GevreyLog


def codes(findings, level=None):
    return {f.code for f in findings if level is None or f.level == level}


def test_single_term():
    op = parse_equation("u - (1) Dti[1] Dz[2] u = f")
    assert op.kappa == 1 and op.K == (1,) and op.p == {1: 2}
    assert op.leading() == (1,)


def test_two_terms():
    op = parse_equation("u - (2+z) Dti[2] Dz[3] u - (z) Dti[1] Dz[1] u = f")
    assert op.kappa == 2 and set(op.K) == {1, 2}
    assert op.p == {1: 1, 2: 3}
    assert op.leading() == (2, 1)


def test_round_trip():
    text = "u - (2 + z) Dti[2] Dz[3] u - (z) Dti[1] Dz[1] u = f"
    assert format_equation(parse_equation(text)) == text
    assert parse_equation(format_equation(parse_equation(text))) == parse_equation(text)


def test_semantic_errors():
    with pytest.raises(SemanticError):
        parse_equation("u - Dti[0] u = f")
    with pytest.raises(SemanticError):
        parse_equation("u - Dti[1] Dz[1] u - Dti[1] Dz[1] u = f")


def test_syntax_error_position():
    with pytest.raises(SpecSyntaxError) as ei:
        parse_equation("u - (1) Dti[1] Dz[2 u = f")
    assert ei.value.line == 1 and ei.value.col == 21
    assert ei.value.expected == "']'"


def test_spec_file_defaults_and_literals():
    spec = parse_problem(
        'equation = "u - (1) Dti[1] Dz[2] u = f"\n'
        "m2 = { gamma_moment = 2 }\n"
        "base = { gevrey_log = [1, -1] }\n"
        's2 = "1/2"\n'
    )
    assert isinstance(spec.m2, GammaMoment)
    assert isinstance(spec.base, GevreyLog)
    assert spec.s2 == Fraction(1, 2)
    res = spec.resolved()
    for key in ("s1", "s2", "r", "nt", "nz", "pmax", "precision", "f", "m1"):
        assert key in res


def test_unknown_key_position():
    with pytest.raises(SpecSyntaxError) as ei:
        parse_problem('equation = "u - (1) Dti[1] Dz[2] u = f"\nradius = 0.5\n')
    assert (ei.value.line, ei.value.col) == (2, 1)


def test_equation_error_mapped_to_file():
    with pytest.raises(SpecSyntaxError) as ei:
        parse_problem('nt = 4\nequation = "u - (1) Dti[1] Dz[2 u = f"\n')
    assert ei.value.line == 2 and ei.value.col > 12


def test_precision_env(monkeypatch):
    monkeypatch.setenv("MSL_PRECISION_BITS", "200")
    spec = parse_problem('equation = "u - (1) Dti[1] Dz[2] u = f"\n')
    assert spec.precision == 200
    spec = parse_problem('equation = "u - (1) Dti[1] Dz[2] u = f"\nprecision = 96\n')
    assert spec.precision == 96
    spec = parse_problem('equation = "u - (1) Dti[1] Dz[2] u = f"\nprecision = 96\n', precision=160)
    assert spec.precision == 160


def test_validate_good():
    spec = ProblemSpec.build("u - (1) Dti[2] Dz[3] u - (z) Dti[1] Dz[1] u = f")
    assert not has_errors(validate_spec(spec))


def test_validate_not_a_unit():
    spec = ProblemSpec.build("u - (z + z^2) Dti[1] Dz[2] u = f")
    assert "NotAUnit" in codes(validate_spec(spec), "error")


def test_validate_no_positive_slope():
    spec = ProblemSpec.build("u - (1) Dti[2] Dz[1] u = f")
    assert "NoPositiveSlope" in codes(validate_spec(spec), "error")


def test_validate_ratio_ordering():
    spec = ProblemSpec.build("u - (1) Dti[2] Dz[3] u - (1) Dti[1] Dz[2] u = f")
    assert "RatioOrdering" in codes(validate_spec(spec), "error")


def test_validate_radius_and_zero():
    spec = ProblemSpec.build("u - (1) Dti[1] Dz[2] u = f", r=Fraction(3, 2))
    assert "RadiusOutOfRange" in codes(validate_spec(spec), "error")
    spec = ProblemSpec.build("u - (1 - 4 z) Dti[1] Dz[2] u = f")
    assert "ZeroInDisc" in codes(validate_spec(spec), "warning")


def test_validate_order_mismatch():
    spec = ProblemSpec.build("u - (1) Dti[1] Dz[2] u = f", m2=GammaMoment(2))
    assert "OrderMismatch" in codes(validate_spec(spec), "warning")


def test_load_problem(specs_dir):
    spec = load_problem(specs_dir / "heat.toml")
    assert spec.nt == 40 and spec.nz == 20
