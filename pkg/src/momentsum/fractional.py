"""Formal fractional calculus on series in ``z**alpha``.

A :class:`FracSeries` with step ``alpha`` stores plain coefficients ``b_p`` of
``z**(alpha*p)``. The Caputo-type derivative of order ``alpha`` acts as a shift
on the normalised coefficients ``a_p = b_p * Gamma(1 + alpha*p)``; the
Riemann-Liouville integral is applied termwise through
``z**beta -> Gamma(1+beta)/Gamma(1+alpha+beta) z**(alpha+beta)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Sequence

import mpmath
from mpmath import mp

from ._numeric import as_fraction, check_prec, default_prec, is_exact, to_mp, to_mpc
from .errors import GridMismatch, OrderExhausted
from .sequences import GammaMoment, Gevrey
from .series import ZSeries, moment_deriv, moment_integral

__all__ = [
    "FracSeries",
    "caputo_frac_deriv",
    "rl_integral",
    "frac_correspondence_check",
    "gamma_ratio",
]


def _rational(alpha) -> Fraction:
    try:
        a = as_fraction(alpha)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"fractional orders must be rational, got {alpha!r}") from exc
    if a <= 0:
        raise ValueError(f"fractional order must be positive, got {alpha}")
    return a


def gamma_ratio(a: Fraction, b: Fraction, prec: int, exact: bool):
    """``Gamma(1+a) / Gamma(1+b)``; a rational when both arguments are integers and ``exact``."""
    if exact and a.denominator == 1 and b.denominator == 1 and a >= 0 and b >= 0:
        return Fraction(factorial(int(a)), factorial(int(b)))
    with mp.workprec(prec + 16):
        x = mpmath.gamma(1 + to_mp(a, prec + 16)) * mpmath.rgamma(1 + to_mp(b, prec + 16))
    with mp.workprec(prec):
        return +x


@dataclass(frozen=True)
class FracSeries:
    """``sum_p b_p z**(alpha*p)`` for ``p = 0..N``."""

    alpha: Fraction
    coeffs: tuple
    prec: int
    exact: bool

    def __init__(self, alpha, coeffs: Sequence, *, prec: int | None = None):
        a = _rational(alpha)
        cs = tuple(coeffs)
        if not cs:
            raise ValueError("a fractional series needs at least one coefficient")
        prec = check_prec(prec if prec is not None else default_prec())
        exact = all(is_exact(c) for c in cs)
        if exact:
            cs = tuple(Fraction(c) for c in cs)
        else:
            cs = tuple(to_mpc(c, prec) for c in cs)
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "coeffs", cs)
        object.__setattr__(self, "prec", prec)
        object.__setattr__(self, "exact", exact)

    @classmethod
    def from_zseries(cls, f: ZSeries, k: int = 1) -> "FracSeries":
        """``f(z**(1/k))`` on the grid of step ``1/k``, up to the valid order of ``f``."""
        return cls(Fraction(1, k), f.coeffs[: f.valid + 1], prec=f.prec)

    @property
    def N(self) -> int:
        return len(self.coeffs) - 1

    @property
    def valid_order(self) -> Fraction:
        """Highest exponent carried: ``N * alpha``."""
        return self.N * self.alpha

    def exponent(self, p: int) -> Fraction:
        return self.alpha * p

    def inexact(self) -> "FracSeries":
        if not self.exact:
            return self
        return FracSeries(self.alpha, [to_mpc(c, self.prec) for c in self.coeffs], prec=self.prec)

    def refine(self, step) -> "FracSeries":
        """Re-express on a finer grid whose step divides the current one."""
        h = _rational(step)
        ratio = self.alpha / h
        if ratio.denominator != 1:
            raise GridMismatch(f"step {h} does not divide grid step {self.alpha}")
        r = int(ratio)
        zero = Fraction(0) if self.exact else mpmath.mpc(0)
        cs = [zero] * (self.N * r + 1)
        for p, c in enumerate(self.coeffs):
            cs[p * r] = c
        return FracSeries(h, cs, prec=self.prec)

    def normalised(self) -> list:
        """``a_p = b_p * Gamma(1 + alpha*p)``."""
        ex = self.exact and self.alpha.denominator == 1
        return [c * gamma_ratio(self.alpha * p, Fraction(0), self.prec, ex)
                for p, c in enumerate(self.coeffs)]

    def evaluate(self, z):
        with mp.workprec(self.prec):
            z = mpmath.mpmathify(z)
            return mpmath.fsum(to_mp(c, self.prec) * z ** to_mp(self.alpha * p, self.prec)
                               for p, c in enumerate(self.coeffs))


def caputo_frac_deriv(f: FracSeries) -> FracSeries:
    """Derivative of order ``f.alpha``: slot ``p`` receives ``b_{p+1} Gamma(1+alpha(p+1))/Gamma(1+alpha p)``."""
    if f.N < 1:
        raise OrderExhausted("the fractional derivative needs at least two slots")
    a = f.alpha
    ex = f.exact and a.denominator == 1
    src = f if ex else f.inexact()
    with mp.workprec(f.prec):
        out = [src.coeffs[p + 1] * gamma_ratio(a * (p + 1), a * p, f.prec, ex) for p in range(f.N)]
    return FracSeries(a, out, prec=f.prec)


def rl_integral(f, alpha, *, truncate: bool = False):
    """Riemann-Liouville integral of order ``alpha`` applied termwise.

    A :class:`FracSeries` grows by ``alpha / step`` slots. A :class:`ZSeries`
    keeps its nominal order (grid step 1, so ``alpha`` must be an integer) and
    follows :func:`~momentsum.series.moment_integral` for overflow handling.
    """
    a = _rational(alpha)
    if isinstance(f, ZSeries):
        if a.denominator != 1:
            raise GridMismatch(f"order {a} is not a multiple of the integer grid of a z-series")
        # Gamma(1+p)/Gamma(1+p+i) = p!/(p+i)!
        return moment_integral(f, Gevrey(1, prec=f.prec), "z", int(a), truncate=truncate)
    if not isinstance(f, FracSeries):
        raise TypeError(f"expected FracSeries or ZSeries, got {type(f).__name__}")
    shift = a / f.alpha
    if shift.denominator != 1:
        raise GridMismatch(f"order {a} is not a multiple of the grid step {f.alpha}")
    s = int(shift)
    ex = f.exact and f.alpha.denominator == 1 and a.denominator == 1
    src = f if ex else f.inexact()
    zero = Fraction(0) if ex else mpmath.mpc(0)
    with mp.workprec(f.prec):
        body = [c * gamma_ratio(f.alpha * p, f.alpha * p + a, f.prec, ex) for p, c in enumerate(src.coeffs)]
    return FracSeries(f.alpha, [zero] * s + body, prec=f.prec)


def frac_correspondence_check(k: int, f: ZSeries, N: int):
    """Largest coefficient gap between both sides of the moment/Caputo correspondence.

    Left: moment derivative with ``m(p) = Gamma(1 + p/k)`` composed with
    ``z -> z**(1/k)``. Right: Caputo derivative of order ``1/k`` of
    ``f(z**(1/k))``, with the Gamma ratios evaluated directly. Compared on
    slots ``0..N``; ``f`` must be valid through ``N + 1``.
    """
    if k < 1:
        raise ValueError("k must be a positive integer")
    if f.valid < N + 1:
        raise OrderExhausted(f"need a series valid to order {N + 1}, got {f.valid}")
    prec = f.prec
    head = ZSeries(f.coeffs[: N + 2], prec=prec, exact=f.exact)
    lhs = moment_deriv(head, GammaMoment(k, prec=prec), "z", 1)
    rhs = caputo_frac_deriv(FracSeries(Fraction(1, k), head.coeffs, prec=prec))
    with mp.workprec(prec):
        gap = mpmath.mpf(0)
        for p in range(N + 1):
            d = abs(to_mp(lhs.coeffs[p], prec) - to_mp(rhs.coeffs[p], prec))
            gap = max(gap, d)
        return gap
