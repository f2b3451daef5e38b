"""Structural checks on a parsed problem.

Findings are returned, never raised: callers decide whether an ``error`` blocks
their work. The formal solver, for instance, needs none of the structural
hypotheses, while the summability analysis needs all of them.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np
from mpmath import mp

from ..errors import DegenerateFit, LcViolation, MomentSumError
from ..sequences import regular_order_fit, verify_srs
from ..series import unit_threshold

__all__ = ["Finding", "validate_spec", "has_errors", "ORDER_FIT_TOL", "ORDER_FIT_DEPTH"]

ORDER_FIT_TOL = 0.05
ORDER_FIT_DEPTH = 60
MODULUS_SAMPLES = 64


@dataclass(frozen=True)
class Finding:
    level: str  # "error" or "warning"
    code: str
    message: str

    def as_dict(self) -> dict:
        return {"level": self.level, "code": self.code, "message": self.message}


def has_errors(findings) -> bool:
    return any(f.level == "error" for f in findings)


def _check_leading(spec, out: list):
    op = spec.operator
    lead = op.leading()
    a0 = lead[0] if lead else Fraction(0)
    thr = unit_threshold(spec.precision)
    if abs(mpmath.mpf(a0.numerator) / a0.denominator) <= thr:
        out.append(Finding("error", "NotAUnit",
                           f"a_{{{op.kappa},{op.p_kappa}}}(0) = {a0} is not invertible"))
        return
    if not (0 < spec.r < 1):
        return
    r = float(spec.r)
    coeffs = [float(c) for c in lead]
    zs = r * np.exp(2j * np.pi * np.arange(MODULUS_SAMPLES) / MODULUS_SAMPLES)
    vals = np.polyval(coeffs[::-1], zs)
    minmod = float(np.min(np.abs(vals)))
    if len(coeffs) > 1:
        roots = np.roots(coeffs[::-1])
        inside = [z for z in roots if abs(z) <= r]
        if inside:
            out.append(Finding(
                "warning", "ZeroInDisc",
                f"a_{{{op.kappa},{op.p_kappa}}} vanishes inside |z| <= {spec.r} "
                f"(|root| = {min(abs(z) for z in inside):.6g})",
            ))
    if minmod < 1e-8:
        out.append(Finding("warning", "SmallModulus",
                           f"min |a_{{{op.kappa},{op.p_kappa}}}| on |z| = {spec.r} is {minmod:.3g}"))


def _check_slopes(spec, out: list):
    op = spec.operator
    ratio = spec.s1 / spec.s2
    if not any(Fraction(op.p[i], i) > ratio for i in op.K):
        out.append(Finding(
            "error", "NoPositiveSlope",
            f"no term has p_i/i > s1/s2 = {ratio}; the polygon has no positive slope",
        ))
    top = Fraction(op.p_kappa, op.kappa)
    for i in op.K:
        if Fraction(op.p[i], i) > top:
            out.append(Finding(
                "error", "RatioOrdering",
                f"p_{i}/{i} = {Fraction(op.p[i], i)} exceeds p_kappa/kappa = {top}",
            ))


def _check_sequences(spec, out: list):
    for name, m, s in (("m1", spec.m1, spec.s1), ("m2", spec.m2, spec.s2)):
        try:
            fit = regular_order_fit(m, spec.base, ORDER_FIT_DEPTH)
        except (DegenerateFit, MomentSumError) as exc:
            out.append(Finding("warning", "OrderFit", f"{name}: order fit unavailable ({exc})"))
            continue
        with mp.workprec(spec.precision):
            gap = abs(fit.s_hat - mpmath.mpf(s.numerator) / s.denominator)
        if gap > ORDER_FIT_TOL:
            out.append(Finding(
                "warning", "OrderMismatch",
                f"{name} fits order {mpmath.nstr(fit.s_hat, 6)} against the base, declared s = {s}",
            ))
    try:
        verify_srs(spec.base, 30)
    except LcViolation as exc:
        out.append(Finding("error", "LcViolation", f"base sequence: {exc}"))
    except MomentSumError as exc:
        out.append(Finding("warning", exc.code, f"base sequence: {exc}"))


def validate_spec(spec) -> list[Finding]:
    """Check the structural hypotheses of a :class:`~momentsum.dsl.specfile.ProblemSpec`.

    Errors: non-invertible leading coefficient, no positive slope candidate,
    ``p_i/i > p_kappa/kappa``, disc radius outside ``(0, 1)``, non log-convex
    base sequence. Warnings: leading coefficient small or vanishing on the
    disc, declared orders not matching the fitted ones.
    """
    out: list[Finding] = []
    if not (0 < spec.r < 1):
        out.append(Finding("error", "RadiusOutOfRange", f"disc radius r = {spec.r} must lie in (0, 1)"))
    if spec.s1 <= 0 or spec.s2 <= 0:
        out.append(Finding("error", "NonPositiveOrder", "s1 and s2 must be positive"))
        return out
    _check_leading(spec, out)
    _check_slopes(spec, out)
    _check_sequences(spec, out)
    return out
