"""Scalar helpers shared by the series and sequence layers.

Two coefficient domains are supported: exact rationals (``Fraction`` / ``int``)
and mpmath complex floats at an explicit binary precision.
"""

from __future__ import annotations

import os
from fractions import Fraction
from numbers import Rational

import mpmath
from mpmath import mp

DEFAULT_PREC = 128
MIN_PREC = 64


def default_prec() -> int:
    raw = os.environ.get("MSL_PRECISION_BITS")
    if raw is None:
        return DEFAULT_PREC
    try:
        bits = int(raw)
    except ValueError:
        return DEFAULT_PREC
    return max(bits, MIN_PREC)


def check_prec(prec: int) -> int:
    if int(prec) < MIN_PREC:
        raise ValueError(f"precision must be at least {MIN_PREC} bits, got {prec}")
    return int(prec)


def eps(prec: int) -> mpmath.mpf:
    """Unit roundoff 2**(1 - prec)."""
    return mpmath.ldexp(mpmath.mpf(1), 1 - prec)


def is_exact(x) -> bool:
    return isinstance(x, (int, Rational)) and not isinstance(x, bool)


def as_fraction(x) -> Fraction:
    """Parse ints, Fractions and "p/q" or decimal strings exactly."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        # decimal literal as written, not the binary expansion
        return Fraction(repr(x))
    raise TypeError(f"cannot read {x!r} as a rational")


def to_mp(x, prec: int):
    """Convert any supported scalar to mpc/mpf at ``prec`` bits."""
    with mp.workprec(prec):
        if isinstance(x, Fraction):
            return mpmath.mpf(x.numerator) / x.denominator
        if isinstance(x, (mpmath.mpf, mpmath.mpc)):
            return +x
        return mpmath.mpmathify(x)


def to_mpc(x, prec: int) -> mpmath.mpc:
    with mp.workprec(prec):
        return mpmath.mpc(to_mp(x, prec))


def absval(x, prec: int):
    if is_exact(x):
        return abs(Fraction(x))
    with mp.workprec(prec):
        return abs(x)


def to_float(x) -> float:
    if isinstance(x, Fraction):
        return float(x)
    if isinstance(x, mpmath.mpc):
        return float(abs(x)) if x.imag else float(x.real)
    return float(x)


def fmt_scalar(x, digits: int = 40):
    """JSON-safe text encoding: "p/q" for rationals, decimal strings otherwise."""
    if is_exact(x):
        f = Fraction(x)
        return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"
    if isinstance(x, mpmath.mpc):
        if x.imag == 0:
            return mpmath.nstr(x.real, digits)
        return [mpmath.nstr(x.real, digits), mpmath.nstr(x.imag, digits)]
    return mpmath.nstr(x, digits)
