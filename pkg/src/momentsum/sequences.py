"""Strongly regular sequences and moment sequences.

A :class:`SequenceHandle` evaluates a positive sequence ``M_p`` (``M_0 = 1``).
Integer-valued variants (integer Gevrey order, ``Gamma(1 + n p)``, integer
powers of those, rational tables) are evaluated exactly as ``Fraction``; all
others as mpmath floats at the handle's precision.

The module also certifies the (lc), (mg), (snq) conditions on a finite window,
fits the order of one sequence relative to another, and estimates the
associated function ``M(t) = sup_p log(t^p / M_p)`` and the growth index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath
import numpy as np
from mpmath import mp

from ._numeric import as_fraction, check_prec, default_prec, eps, to_mp
from .errors import DegenerateFit, GridTooSmall, LcViolation, TableExhausted

__all__ = [
    "SequenceHandle",
    "Gevrey",
    "GevreyLog",
    "GammaMoment",
    "PowerOf",
    "Table",
    "SrsCertificate",
    "OrderFit",
    "FloorQuotientWitness",
    "AssociatedFunction",
    "seq_eval",
    "verify_srs",
    "regular_order_fit",
    "floor_quotient_witness",
    "assoc_M_and_omega",
    "sequence_from_literal",
]


class SequenceHandle:
    """Base class; subclasses implement :meth:`_compute`.

    Values are memoized per handle. The memo is filled idempotently (every
    entry is a pure function of ``(variant, p, prec)``), so concurrent readers
    see the same numbers as a serial evaluation would.
    """

    exact: bool = False

    def __init__(self, prec: int | None = None):
        self.prec = check_prec(prec if prec is not None else default_prec())
        self._cache: dict[int, object] = {}

    # -- evaluation -----------------------------------------------------
    def _compute(self, p: int):
        raise NotImplementedError

    def __call__(self, p: int):
        if p < 0:
            raise ValueError(f"sequence index must be nonnegative, got {p}")
        try:
            return self._cache[p]
        except KeyError:
            pass
        if self.exact:
            v = self._compute(p)
        else:
            with mp.workprec(self.prec):
                v = self._compute(p)
        self._cache[p] = v
        return v

    def ratio(self, p: int):
        """``M_p / M_{p-1}`` for ``p >= 1``."""
        if p < 1:
            raise ValueError("ratio is defined for p >= 1")
        num, den = self(p), self(p - 1)
        if self.exact:
            return Fraction(num) / Fraction(den)
        with mp.workprec(self.prec):
            return num / den

    def mp(self, p: int) -> mpmath.mpf:
        return to_mp(self(p), self.prec)

    def log_value(self, p: int) -> mpmath.mpf:
        with mp.workprec(self.prec):
            return mpmath.log(self.mp(p))

    def max_index(self) -> int | None:
        """Largest evaluable index, ``None`` if unbounded."""
        return None

    def omega(self) -> Fraction | None:
        """Growth index when known in closed form."""
        return None

    def with_prec(self, prec: int) -> "SequenceHandle":
        raise NotImplementedError

    def literal(self) -> dict:
        """Spec-file literal describing this handle."""
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.literal()!r})"

    def __eq__(self, other) -> bool:
        return type(self) is type(other) and self.literal() == other.literal()

    def __hash__(self) -> int:
        return hash((type(self).__name__, repr(self.literal())))


def _frac_text(x: Fraction) -> str | int:
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


class Gevrey(SequenceHandle):
    """``M_p = (p!)**alpha``."""

    def __init__(self, alpha, prec: int | None = None):
        super().__init__(prec)
        self.alpha = as_fraction(alpha)
        if self.alpha <= 0:
            raise ValueError("Gevrey order must be positive")
        self.exact = self.alpha.denominator == 1

    def _compute(self, p):
        f = math.factorial(p)
        if self.exact:
            return Fraction(f ** self.alpha.numerator)
        a = mpmath.mpf(self.alpha.numerator) / self.alpha.denominator
        return mpmath.power(mpmath.mpf(f), a)

    def log_value(self, p):
        with mp.workprec(self.prec):
            a = mpmath.mpf(self.alpha.numerator) / self.alpha.denominator
            return a * mpmath.loggamma(p + 1)

    def omega(self):
        return self.alpha

    def with_prec(self, prec):
        return Gevrey(self.alpha, prec)

    def literal(self):
        return {"gevrey": _frac_text(self.alpha)}


class GevreyLog(SequenceHandle):
    """``M_p = (p!)**alpha * prod_{m=0}^{p} log(e + m)**beta``."""

    def __init__(self, alpha, beta, prec: int | None = None):
        super().__init__(prec)
        self.alpha = as_fraction(alpha)
        self.beta = as_fraction(beta)
        if self.alpha <= 0:
            raise ValueError("Gevrey order must be positive")
        self.exact = False

    def _compute(self, p):
        return mpmath.exp(self.log_value(p))

    def log_value(self, p):
        with mp.workprec(self.prec + 16):
            a = mpmath.mpf(self.alpha.numerator) / self.alpha.denominator
            b = mpmath.mpf(self.beta.numerator) / self.beta.denominator
            s = a * mpmath.loggamma(p + 1)
            if b:
                s += b * mpmath.fsum(mpmath.log(mpmath.log(mpmath.e + m)) for m in range(p + 1))
        with mp.workprec(self.prec):
            return +s

    def omega(self):
        return self.alpha

    def with_prec(self, prec):
        return GevreyLog(self.alpha, self.beta, prec)

    def literal(self):
        return {"gevrey_log": [_frac_text(self.alpha), _frac_text(self.beta)]}


class GammaMoment(SequenceHandle):
    """``m(p) = Gamma(1 + p/k)``; the moments of the kernel ``k z^k exp(-z^k)``."""

    def __init__(self, k, prec: int | None = None):
        super().__init__(prec)
        self.k = as_fraction(k)
        if self.k <= 0:
            raise ValueError("moment order k must be positive")
        self.exact = (1 / self.k).denominator == 1

    def _compute(self, p):
        step = 1 / self.k
        if self.exact:
            return Fraction(math.factorial(int(step * p)))
        x = mpmath.mpf(step.numerator * p) / step.denominator
        return mpmath.gamma(1 + x)

    def log_value(self, p):
        with mp.workprec(self.prec):
            step = 1 / self.k
            return mpmath.loggamma(1 + mpmath.mpf(step.numerator * p) / step.denominator)

    def omega(self):
        return 1 / self.k

    def with_prec(self, prec):
        return GammaMoment(self.k, prec)

    def literal(self):
        return {"gamma_moment": _frac_text(self.k)}


class PowerOf(SequenceHandle):
    """``M_p**s`` for a base handle and a positive rational ``s``."""

    def __init__(self, base: SequenceHandle, s, prec: int | None = None):
        super().__init__(prec if prec is not None else base.prec)
        self.base = base if base.prec == self.prec else base.with_prec(self.prec)
        self.s = as_fraction(s)
        if self.s <= 0:
            raise ValueError("power must be positive")
        self.exact = self.base.exact and self.s.denominator == 1

    def _compute(self, p):
        v = self.base(p)
        if self.exact:
            return Fraction(v) ** self.s.numerator
        s = mpmath.mpf(self.s.numerator) / self.s.denominator
        return mpmath.power(to_mp(v, self.prec), s)

    def log_value(self, p):
        with mp.workprec(self.prec):
            return self.base.log_value(p) * self.s.numerator / self.s.denominator

    def max_index(self):
        return self.base.max_index()

    def omega(self):
        w = self.base.omega()
        return None if w is None else self.s * w

    def with_prec(self, prec):
        return PowerOf(self.base.with_prec(prec), self.s, prec)

    def literal(self):
        return {"power_of": {"base": self.base.literal(), "s": _frac_text(self.s)}}


class Table(SequenceHandle):
    """Finitely many user-supplied terms ``M_0 = 1, M_1, ...``."""

    def __init__(self, values: Iterable, prec: int | None = None):
        super().__init__(prec)
        vals = list(values)
        if not vals:
            raise ValueError("table must be non-empty")
        self.exact = all(isinstance(v, (int, Fraction, str)) and not isinstance(v, bool) for v in vals)
        if self.exact:
            self.values = tuple(as_fraction(v) for v in vals)
        else:
            with mp.workprec(self.prec):
                self.values = tuple(to_mp(v, self.prec) for v in vals)
        if any(v <= 0 for v in self.values):
            raise ValueError("table entries must be strictly positive")
        if self.values[0] != 1:
            raise ValueError("table must start with M_0 = 1")

    def _compute(self, p):
        if p >= len(self.values):
            raise TableExhausted(f"table has {len(self.values)} terms, index {p} requested")
        return self.values[p]

    def max_index(self):
        return len(self.values) - 1

    def with_prec(self, prec):
        return Table(self.values, prec)

    def literal(self):
        if self.exact:
            return {"table": [_frac_text(v) for v in self.values]}
        return {"table": [float(v) for v in self.values]}


def seq_eval(seq: SequenceHandle, p: int):
    """``M_p`` to the handle's precision (exact for integer-valued variants)."""
    return seq(p)


def sequence_from_literal(lit, prec: int | None = None) -> SequenceHandle:
    """Build a handle from a spec-file literal such as ``{"gevrey": 1}``."""
    if not isinstance(lit, dict) or len(lit) != 1:
        raise ValueError(f"sequence literal must be a one-key table, got {lit!r}")
    (key, val), = lit.items()
    if key == "gevrey":
        return Gevrey(val, prec)
    if key == "gevrey_log":
        if not isinstance(val, (list, tuple)) or len(val) != 2:
            raise ValueError("gevrey_log expects [alpha, beta]")
        return GevreyLog(val[0], val[1], prec)
    if key == "gamma_moment":
        return GammaMoment(val, prec)
    if key == "power_of":
        if not isinstance(val, dict) or set(val) != {"base", "s"}:
            raise ValueError("power_of expects { base = ..., s = ... }")
        return PowerOf(sequence_from_literal(val["base"], prec), val["s"], prec)
    if key == "table":
        return Table(val, prec)
    raise ValueError(f"unknown sequence variant {key!r}")


# -- certificates ------------------------------------------------------------


@dataclass(frozen=True)
class SrsCertificate:
    lc_ok: bool
    A1: mpmath.mpf
    A2: mpmath.mpf
    C3: dict
    depth: int
    rescale: object = 1
    a2_is_lower_bound: bool = True
    proximate_order_assumed: bool = False


def _normalized(seq: SequenceHandle) -> tuple[SequenceHandle, object]:
    if not isinstance(seq, Table) or len(seq.values) < 2 or seq.values[1] >= 1:
        return seq, 1
    if seq.exact:
        c = 1 / seq.values[1]
        return Table([v * c**p for p, v in enumerate(seq.values)], seq.prec), c
    with mp.workprec(seq.prec):
        c = 1 / seq.values[1]
        return Table([v * c**p for p, v in enumerate(seq.values)], seq.prec), c


def _lc_holds(seq: SequenceHandle, p: int) -> bool:
    lhs = seq(p) * seq(p)
    rhs = seq(p - 1) * seq(p + 1)
    if seq.exact:
        return lhs <= rhs
    with mp.workprec(seq.prec):
        return lhs <= rhs * (1 + 64 * eps(seq.prec))


def verify_srs(seq: SequenceHandle, N: int, dilations: Sequence[int] = (2, 3)) -> SrsCertificate:
    """Check (lc) and estimate the (mg), (snq) and dilation constants up to depth ``N``.

    ``A2`` only sums ``q <= N``, so it is a lower bound of the true constant.
    Tables are clamped to their length; a table with ``M_1 < 1`` is rescaled by
    ``c**p`` (``c = 1/M_1``) first and ``c`` is recorded.
    """
    if N < 4:
        raise ValueError("depth N must be at least 4")
    seq, rescale = _normalized(seq)
    top = seq.max_index()
    if top is not None:
        N = min(N, top - 1)
    for p in range(1, N + 1):
        if not _lc_holds(seq, p):
            raise LcViolation(p + 1)

    prec = seq.prec
    with mp.workprec(prec):
        M = [seq.mp(p) for p in range(N + 2)]
        A1 = mpmath.mpf(1)
        for n in range(1, N + 1):
            for p in range(0, n // 2 + 1):
                v = (M[n] / (M[p] * M[n - p])) ** (mpmath.mpf(1) / n)
                if v > A1:
                    A1 = v
        tail = mpmath.mpf(0)
        A2 = mpmath.mpf(0)
        for p in range(N, -1, -1):
            tail += M[p] / ((p + 1) * M[p + 1])
            A2 = max(A2, M[p + 1] / M[p] * tail)
        C3 = {}
        for d in dilations:
            best = mpmath.mpf(1)
            for n in range(1, N // d + 1):
                best = max(best, (M[d * n] / M[d * n - 1]) * (M[n - 1] / M[n]))
            C3[int(d)] = best
    return SrsCertificate(
        lc_ok=True,
        A1=A1,
        A2=A2,
        C3=C3,
        depth=N,
        rescale=rescale,
        proximate_order_assumed=isinstance(seq, Table),
    )


@dataclass(frozen=True)
class OrderFit:
    s_hat: mpmath.mpf
    a: mpmath.mpf
    b: mpmath.mpf
    depth: int
    intercept: mpmath.mpf = field(default=mpmath.mpf(0))


def regular_order_fit(m: SequenceHandle, M: SequenceHandle, N: int) -> OrderFit:
    """Fit ``m(n)/m(n-1) ~ (M_n/M_{n-1})**s`` over ``1 <= n <= N``.

    ``s_hat`` is the least-squares slope of the log ratios; ``a`` and ``b`` are
    the extreme values of ``(m(n)/m(n-1)) / (M_n/M_{n-1})**s_hat``.
    """
    if N < 8:
        raise ValueError("order fit needs N >= 8")
    for h in (m, M):
        top = h.max_index()
        if top is not None:
            N = min(N, top)
    if N < 3:
        raise DegenerateFit(f"only {max(N, 0)} ratios available")
    prec = max(m.prec, M.prec)
    with mp.workprec(prec):
        xs = [mpmath.log(to_mp(M.ratio(n), prec)) for n in range(1, N + 1)]
        ys = [mpmath.log(to_mp(m.ratio(n), prec)) for n in range(1, N + 1)]
        xbar = mpmath.fsum(xs) / N
        ybar = mpmath.fsum(ys) / N
        sxx = mpmath.fsum((x - xbar) ** 2 for x in xs)
        if sxx <= eps(prec) * max(1, abs(xbar)) ** 2 * N:
            raise DegenerateFit("regressor log(M_n/M_{n-1}) is constant")
        sxy = mpmath.fsum((x - xbar) * (y - ybar) for x, y in zip(xs, ys))
        s_hat = sxy / sxx
        q = [mpmath.exp(y - s_hat * x) for x, y in zip(xs, ys)]
        return OrderFit(s_hat=s_hat, a=min(q), b=max(q), depth=N, intercept=ybar - s_hat * xbar)


@dataclass(frozen=True)
class FloorQuotientWitness:
    p: int
    q: int
    C1: mpmath.mpf
    D1: mpmath.mpf
    C2: mpmath.mpf
    D2: mpmath.mpf
    depth: int

    def holds(self, seq: SequenceHandle, rtol=None) -> bool:
        """Re-check both inequalities for ``n <= depth`` (slack ``rtol``)."""
        prec = seq.prec
        with mp.workprec(prec):
            rtol = 256 * eps(prec) if rtol is None else rtol
            e = mpmath.mpf(self.p) / self.q
            for n in range(self.depth + 1):
                lo = seq.mp(n * self.p // self.q)
                hi = seq.mp(n) ** e
                if lo > self.C1 * self.D1**n * hi * (1 + rtol):
                    return False
                if hi > self.C2 * self.D2**n * lo * (1 + rtol):
                    return False
        return True


def floor_quotient_witness(seq: SequenceHandle, p: int, q: int, N: int) -> FloorQuotientWitness:
    """Constants for ``M_{floor(np/q)} <= C1 D1^n M_n^{p/q}`` and the reverse bound.

    ``C1 = C2 = 1``; ``D1``, ``D2`` are the smallest values ``>= 1`` that make
    both inequalities hold for every ``n <= N``.
    """
    if p < 1 or q < 1:
        raise ValueError("p and q must be positive")
    if N < q:
        raise ValueError("depth N must be at least q")
    prec = seq.prec
    with mp.workprec(prec):
        e = mpmath.mpf(p) / q
        d1 = mpmath.mpf(0)
        d2 = mpmath.mpf(0)
        for n in range(1, N + 1):
            gap = seq.log_value(n * p // q) - e * seq.log_value(n)
            d1 = max(d1, gap / n)
            d2 = max(d2, -gap / n)
        one = mpmath.mpf(1)
        return FloorQuotientWitness(p, q, one, mpmath.exp(d1), one, mpmath.exp(d2), N)


# -- associated function -----------------------------------------------------


@dataclass(frozen=True)
class AssociatedFunction:
    t: tuple
    values: tuple
    argmax: tuple
    omega: float
    slope: float
    window: tuple


def assoc_M_and_omega(
    seq: SequenceHandle,
    t_grid: Sequence[float],
    P_max: int,
    window: tuple[float, float] | None = None,
) -> AssociatedFunction:
    """Tabulate ``M(t) = max_{p <= P_max} log(t^p / M_p)`` and estimate the growth index.

    The index is the reciprocal slope of ``log M(r)`` against ``log r``,
    regressed over ``window`` (default: the upper half of the grid).
    ``M(0) = 0`` by definition.
    """
    if any(t < 0 for t in t_grid):
        raise ValueError("grid must be nonnegative")
    logM = np.array([float(seq.log_value(p)) for p in range(P_max + 1)])
    ps = np.arange(P_max + 1, dtype=float)
    vals, arg = [], []
    for t in t_grid:
        if t == 0:
            vals.append(0.0)
            arg.append(0)
            continue
        g = ps * math.log(t) - logM
        j = int(np.argmax(g))
        if j == P_max:
            raise GridTooSmall(f"sup for t={t} attained at p=P_max={P_max}; raise P_max")
        vals.append(float(g[j]))
        arg.append(j)

    ts = np.asarray(t_grid, dtype=float)
    if window is None:
        pos = np.sort(ts[ts > 0])
        lo = pos[len(pos) // 2] if len(pos) else math.inf
        window = (float(lo), float(pos[-1]) if len(pos) else math.inf)
    sel = [(math.log(t), math.log(v)) for t, v in zip(t_grid, vals)
           if window[0] <= t <= window[1] and v > 0 and t > 0]
    if len(sel) < 2:
        raise DegenerateFit("fewer than two grid points with M(t) > 0 in the window")
    x = np.array([s[0] for s in sel])
    y = np.array([s[1] for s in sel])
    if np.ptp(x) == 0:
        raise DegenerateFit("window contains a single radius")
    slope = float(np.polyfit(x, y, 1)[0])
    if slope <= 0:
        raise DegenerateFit("log M(r) does not grow with log r on the window")
    return AssociatedFunction(tuple(t_grid), tuple(vals), tuple(arg), 1.0 / slope, slope, window)
