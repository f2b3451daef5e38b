"""Truncated power series in ``z`` and in ``t`` over z-series.

Coefficients are stored plainly (the coefficient of ``z**n`` is ``c[n]``; no
hidden ``1/m(n)`` factor). Moment sequences enter only through the operators
:func:`moment_deriv` and :func:`moment_integral`.

Every series carries a nominal order ``N`` (its length minus one) and a valid
order ``V <= N``: coefficients above ``V`` are placeholders after operations
that consume high-order information (moment differentiation, products with
partially valid factors). Operations never read above the valid order of an
input when producing a coefficient they report as valid.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

import mpmath
from mpmath import mp

from ._numeric import check_prec, default_prec, is_exact, to_mp, to_mpc
from .errors import NotAUnit, OrderExhausted, ProfileMismatch, RadiusOutOfRange, TruncationOverflow
from .sequences import SequenceHandle

__all__ = [
    "ZSeries",
    "TSeries",
    "ps_add_mul",
    "ps_invert_unit",
    "moment_deriv",
    "moment_integral",
    "norm_rtilde",
    "unit_threshold",
]


def unit_threshold(prec: int) -> mpmath.mpf:
    """Smallest admissible ``|a(0)|`` for inversion: 1e-30 at 128 bits, scaled with precision."""
    with mp.workprec(prec):
        return mpmath.mpf(10) ** -30 * mpmath.ldexp(1, 128 - prec)


class ZSeries:
    """Truncated series ``c_0 + c_1 z + ... + c_N z^N`` with a valid order."""

    __slots__ = ("coeffs", "valid", "exact", "prec")

    def __init__(self, coeffs: Iterable, valid: int | None = None, *, prec: int | None = None,
                 exact: bool | None = None):
        cs = tuple(coeffs)
        if not cs:
            raise ValueError("a series needs at least one coefficient")
        self.prec = check_prec(prec if prec is not None else default_prec())
        if exact is None:
            exact = all(is_exact(c) for c in cs)
        if exact:
            cs = tuple(c if isinstance(c, Fraction) else Fraction(c) for c in cs)
        else:
            with mp.workprec(self.prec):
                cs = tuple(to_mpc(c, self.prec) for c in cs)
        self.coeffs = cs
        self.exact = bool(exact)
        N = len(cs) - 1
        self.valid = N if valid is None else min(int(valid), N)

    # -- construction ---------------------------------------------------
    @classmethod
    def zeros(cls, N: int, *, prec=None, exact=True) -> "ZSeries":
        zero = Fraction(0) if exact else 0
        return cls([zero] * (N + 1), prec=prec, exact=exact)

    @classmethod
    def constant(cls, c, N: int, *, prec=None) -> "ZSeries":
        return cls.monomial(c, 0, N, prec=prec)

    @classmethod
    def monomial(cls, c, n: int, N: int, *, prec=None) -> "ZSeries":
        if n > N:
            raise TruncationOverflow(f"z^{n} does not fit in nominal order {N}")
        exact = is_exact(c)
        zero = Fraction(0) if exact else 0
        cs = [zero] * (N + 1)
        cs[n] = c
        return cls(cs, prec=prec, exact=exact)

    @classmethod
    def from_poly(cls, poly: Sequence, N: int, *, prec=None) -> "ZSeries":
        """Pad (or reject) a coefficient list to nominal order ``N``; valid to ``N``."""
        poly = list(poly)
        while len(poly) > N + 1:
            if poly[-1] != 0:
                raise TruncationOverflow(f"polynomial of degree {len(poly) - 1} exceeds order {N}")
            poly.pop()
        exact = all(is_exact(c) for c in poly)
        zero = Fraction(0) if exact else 0
        return cls(poly + [zero] * (N + 1 - len(poly)), prec=prec, exact=exact)

    # -- basic protocol -------------------------------------------------
    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def profile(self) -> tuple[int, int]:
        return (self.order, self.prec)

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, n):
        return self.coeffs[n]

    def __iter__(self):
        return iter(self.coeffs)

    def __repr__(self):
        head = ", ".join(str(c) for c in self.coeffs[: min(len(self.coeffs), 6)])
        more = ", ..." if len(self.coeffs) > 6 else ""
        return f"ZSeries([{head}{more}], N={self.order}, valid={self.valid})"

    def __eq__(self, other):
        if not isinstance(other, ZSeries):
            return NotImplemented
        return self.valid == other.valid and self.coeffs == other.coeffs

    __hash__ = None

    def is_zero(self, upto: int | None = None) -> bool:
        upto = self.valid if upto is None else upto
        return all(c == 0 for c in self.coeffs[: upto + 1])

    def inexact(self, prec: int | None = None) -> "ZSeries":
        prec = self.prec if prec is None else prec
        if not self.exact and prec == self.prec:
            return self
        return ZSeries(self.coeffs, self.valid, prec=prec, exact=False)

    def with_valid(self, valid: int) -> "ZSeries":
        out = ZSeries.__new__(ZSeries)
        out.coeffs, out.exact, out.prec = self.coeffs, self.exact, self.prec
        out.valid = min(valid, self.order)
        return out

    def resized(self, N: int) -> "ZSeries":
        """Change nominal order; extra coefficients are zero and marked unknown."""
        if N <= self.order:
            return ZSeries(self.coeffs[: N + 1], min(self.valid, N), prec=self.prec, exact=self.exact)
        zero = Fraction(0) if self.exact else mpmath.mpc(0)
        return ZSeries(self.coeffs + (zero,) * (N - self.order), self.valid, prec=self.prec,
                       exact=self.exact)

    def scale(self, c) -> "ZSeries":
        if self.exact and is_exact(c):
            c = Fraction(c)
            return _raw(tuple(c * x for x in self.coeffs), self.valid, True, self.prec)
        f = self.inexact()
        with mp.workprec(self.prec):
            c = to_mp(c, self.prec)
            return _raw(tuple(c * x for x in f.coeffs), self.valid, False, self.prec)

    def __add__(self, other):
        if isinstance(other, ZSeries):
            return ps_add_mul(self, other, "add")
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, ZSeries):
            return ps_add_mul(self, other.scale(-1), "add")
        return NotImplemented

    def __neg__(self):
        return self.scale(-1)

    def __mul__(self, other):
        if isinstance(other, ZSeries):
            return ps_add_mul(self, other, "mul")
        if isinstance(other, TSeries):
            return other.zmul(self)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def evaluate(self, z, upto: int | None = None):
        upto = self.valid if upto is None else upto
        with mp.workprec(self.prec):
            z = to_mp(z, self.prec)
            acc = mpmath.mpc(0)
            for c in reversed(self.coeffs[: upto + 1]):
                acc = acc * z + to_mp(c, self.prec)
            return acc


def _raw(coeffs, valid, exact, prec) -> ZSeries:
    out = ZSeries.__new__(ZSeries)
    out.coeffs, out.valid, out.exact, out.prec = coeffs, valid, exact, prec
    return out


def _unify(f: ZSeries, g: ZSeries) -> tuple[ZSeries, ZSeries]:
    if f.profile != g.profile:
        raise ProfileMismatch(f"profiles differ: {f.profile} vs {g.profile}")
    if f.exact == g.exact:
        return f, g
    return f.inexact(), g.inexact()


def _zadd(f: ZSeries, g: ZSeries) -> ZSeries:
    f, g = _unify(f, g)
    if f.exact:
        cs = tuple(a + b for a, b in zip(f.coeffs, g.coeffs))
    else:
        with mp.workprec(f.prec):
            cs = tuple(a + b for a, b in zip(f.coeffs, g.coeffs))
    return _raw(cs, min(f.valid, g.valid), f.exact, f.prec)


def _zmul(f: ZSeries, g: ZSeries) -> ZSeries:
    f, g = _unify(f, g)
    V = min(f.valid, g.valid)
    N = f.order
    # sparse in the first factor: coefficient polynomials are short
    fi = [(k, c) for k, c in enumerate(f.coeffs[: V + 1]) if c != 0]
    gc = g.coeffs
    zero = Fraction(0) if f.exact else mpmath.mpc(0)
    out = [zero] * (N + 1)

    def run():
        for k, c in fi:
            for n in range(k, V + 1):
                b = gc[n - k]
                if b != 0:
                    out[n] += c * b

    if f.exact:
        run()
    else:
        with mp.workprec(f.prec):
            run()
    return _raw(tuple(out), V, f.exact, f.prec)


class TSeries:
    """``sum_n u_n(z) t^n`` for ``n <= N_t``; every ``u_n`` is a :class:`ZSeries` of one profile.

    ``t_valid`` is the valid order along ``t``; each ``u_n`` keeps its own
    z-valid order.
    """

    __slots__ = ("coeffs", "t_valid")

    def __init__(self, coeffs: Iterable[ZSeries], t_valid: int | None = None):
        cs = tuple(coeffs)
        if not cs:
            raise ValueError("a t-series needs at least one coefficient")
        prof = cs[0].profile
        if any(c.profile != prof for c in cs):
            raise ProfileMismatch("all t-coefficients must share one (N_z, precision) profile")
        if not all(c.exact for c in cs) and any(c.exact for c in cs):
            cs = tuple(c.inexact() for c in cs)
        self.coeffs = cs
        N = len(cs) - 1
        self.t_valid = N if t_valid is None else min(int(t_valid), N)

    @classmethod
    def zeros(cls, N_t: int, N_z: int, *, prec=None, exact=True) -> "TSeries":
        z = ZSeries.zeros(N_z, prec=prec, exact=exact)
        return cls([z] * (N_t + 1))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], N_t: int, N_z: int, *, prec=None) -> "TSeries":
        """Rows indexed by t-power, each a list of z-coefficients."""
        rows = [list(r) for r in rows]
        if len(rows) > N_t + 1 and any(any(c != 0 for c in r) for r in rows[N_t + 1:]):
            raise TruncationOverflow(f"t-degree {len(rows) - 1} exceeds order {N_t}")
        rows = rows[: N_t + 1]
        exact = all(is_exact(c) for r in rows for c in r)
        zs = [ZSeries.from_poly(r if r else [0], N_z, prec=prec) for r in rows]
        pad = ZSeries.zeros(N_z, prec=prec, exact=exact)
        zs += [pad] * (N_t + 1 - len(zs))
        if not exact:
            zs = [z.inexact() for z in zs]
        return cls(zs)

    @property
    def N_t(self) -> int:
        return len(self.coeffs) - 1

    @property
    def N_z(self) -> int:
        return self.coeffs[0].order

    @property
    def prec(self) -> int:
        return self.coeffs[0].prec

    @property
    def exact(self) -> bool:
        return self.coeffs[0].exact

    @property
    def profile(self) -> tuple[int, int, int]:
        return (self.N_t, self.N_z, self.prec)

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, n) -> ZSeries:
        return self.coeffs[n]

    def __iter__(self):
        return iter(self.coeffs)

    def __repr__(self):
        return f"TSeries(N_t={self.N_t}, N_z={self.N_z}, t_valid={self.t_valid}, exact={self.exact})"

    def __eq__(self, other):
        if not isinstance(other, TSeries):
            return NotImplemented
        return self.t_valid == other.t_valid and self.coeffs == other.coeffs

    __hash__ = None

    def coefficient(self, n: int, j: int):
        """Coefficient of ``t^n z^j``."""
        return self.coeffs[n].coeffs[j]

    def z_column(self, j: int) -> list:
        """The t-series ``u_j(t)`` multiplying ``z^j``, as a coefficient list."""
        return [u.coeffs[j] for u in self.coeffs]

    def z_part(self, j: int) -> "TSeries":
        """Keep only the ``z^j`` term: ``u_j(t) z^j``."""
        out = []
        for u in self.coeffs:
            zero = Fraction(0) if u.exact else mpmath.mpc(0)
            cs = [zero] * len(u.coeffs)
            cs[j] = u.coeffs[j]
            out.append(_raw(tuple(cs), u.valid, u.exact, u.prec))
        return TSeries(out, self.t_valid)

    def min_z_valid(self, upto: int | None = None) -> int:
        upto = self.t_valid if upto is None else upto
        return min(u.valid for u in self.coeffs[: upto + 1])

    def inexact(self, prec: int | None = None) -> "TSeries":
        return TSeries([u.inexact(prec) for u in self.coeffs], self.t_valid)

    def map(self, fn) -> "TSeries":
        return TSeries([fn(u) for u in self.coeffs], self.t_valid)

    def zmul(self, a: ZSeries) -> "TSeries":
        """Multiply every t-coefficient by the coefficient function ``a(z)``."""
        return self.map(lambda u: _zmul(a, u))

    def scale(self, c) -> "TSeries":
        return self.map(lambda u: u.scale(c))

    def __add__(self, other):
        if isinstance(other, TSeries):
            return ps_add_mul(self, other, "add")
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, TSeries):
            return ps_add_mul(self, other.scale(-1), "add")
        return NotImplemented

    def __neg__(self):
        return self.scale(-1)

    def __mul__(self, other):
        if isinstance(other, TSeries):
            return ps_add_mul(self, other, "mul")
        if isinstance(other, ZSeries):
            return self.zmul(other)
        return self.scale(other)

    def __rmul__(self, other):
        if isinstance(other, ZSeries):
            return self.zmul(other)
        return self.scale(other)


def ps_add_mul(f, g, op: str):
    """Sum or truncated Cauchy product of two series of the same kind and profile."""
    if op not in ("add", "mul"):
        raise ValueError(f"op must be 'add' or 'mul', got {op!r}")
    if isinstance(f, ZSeries) and isinstance(g, ZSeries):
        return _zadd(f, g) if op == "add" else _zmul(f, g)
    if isinstance(f, TSeries) and isinstance(g, TSeries):
        if f.profile != g.profile:
            raise ProfileMismatch(f"profiles differ: {f.profile} vs {g.profile}")
        Vt = min(f.t_valid, g.t_valid)
        if op == "add":
            return TSeries([_zadd(a, b) for a, b in zip(f.coeffs, g.coeffs)], Vt)
        out = []
        for n in range(f.N_t + 1):
            if n > Vt:
                out.append(ZSeries.zeros(f.N_z, prec=f.prec, exact=f.exact and g.exact))
                continue
            acc = None
            for k in range(n + 1):
                term = _zmul(f.coeffs[k], g.coeffs[n - k])
                acc = term if acc is None else _zadd(acc, term)
            out.append(acc)
        return TSeries(out, Vt)
    raise ProfileMismatch(f"cannot combine {type(f).__name__} with {type(g).__name__}")


def ps_invert_unit(a: ZSeries, threshold=None) -> ZSeries:
    """Reciprocal of a series with nonvanishing constant term, valid to ``a.valid``."""
    thr = unit_threshold(a.prec) if threshold is None else threshold
    a0 = a.coeffs[0]
    with mp.workprec(a.prec):
        if abs(to_mp(a0, a.prec)) <= thr:
            raise NotAUnit(f"constant term {a0} is below the unit threshold {mpmath.nstr(thr, 5)}")
    V = a.valid
    N = a.order
    if a.exact:
        inv0 = 1 / a0
        b = [inv0]
        for n in range(1, V + 1):
            s = sum((a.coeffs[k] * b[n - k] for k in range(1, n + 1) if a.coeffs[k]), Fraction(0))
            b.append(-inv0 * s)
        b += [Fraction(0)] * (N - V)
        return _raw(tuple(b), V, True, a.prec)
    with mp.workprec(a.prec):
        inv0 = 1 / a0
        b = [inv0]
        for n in range(1, V + 1):
            s = mpmath.fsum(a.coeffs[k] * b[n - k] for k in range(1, n + 1))
            b.append(-inv0 * s)
        b += [mpmath.mpc(0)] * (N - V)
        return _raw(tuple(b), V, False, a.prec)


def _factors(m: SequenceHandle, idx: range, shift: int, prec: int, exact: bool):
    """``m(p + shift) / m(p)`` for ``p`` in ``idx``."""
    if exact:
        return [Fraction(m(p + shift)) / Fraction(m(p)) for p in idx]
    with mp.workprec(prec):
        return [to_mp(m(p + shift), prec) / to_mp(m(p), prec) for p in idx]


def _zderiv(f: ZSeries, m: SequenceHandle, q: int) -> ZSeries:
    if q > f.valid:
        raise OrderExhausted(f"cannot differentiate {q} times a series valid to order {f.valid}")
    if q == 0:
        return f
    exact = f.exact and m.exact
    f = f if exact else f.inexact()
    N = f.order
    fac = _factors(m, range(0, N - q + 1), q, f.prec, exact)
    zero = Fraction(0) if exact else mpmath.mpc(0)
    with mp.workprec(f.prec):
        cs = [fac[p] * f.coeffs[p + q] for p in range(N - q + 1)] + [zero] * q
    return _raw(tuple(cs), f.valid - q, exact, f.prec)


def _zinteg(f: ZSeries, m: SequenceHandle, i: int, truncate: bool) -> ZSeries:
    if i == 0:
        return f
    N = f.order
    if not truncate:
        for p in range(max(0, N - i + 1), f.valid + 1):
            if f.coeffs[p] != 0:
                raise TruncationOverflow(
                    f"z^{p} shifted by {i} exceeds nominal order {N}; pass truncate=True to drop it"
                )
    exact = f.exact and m.exact
    f = f if exact else f.inexact()
    zero = Fraction(0) if exact else mpmath.mpc(0)
    top = N - i
    if top < 0:
        return _raw((zero,) * (N + 1), N, exact, f.prec)
    fac = _factors(m, range(0, top + 1), i, f.prec, exact)
    with mp.workprec(f.prec):
        cs = [zero] * i + [f.coeffs[p] / fac[p] for p in range(top + 1)]
    return _raw(tuple(cs), min(f.valid + i, N), exact, f.prec)


def _check_axis(f, axis):
    if axis not in ("t", "z"):
        raise ValueError(f"axis must be 't' or 'z', got {axis!r}")
    if isinstance(f, ZSeries) and axis != "z":
        raise ValueError("a ZSeries only has the z axis")


def moment_deriv(f, m: SequenceHandle, axis: str = "z", q: int = 1):
    """Apply ``q`` moment derivatives: coefficient ``p`` becomes ``m(p+q)/m(p) * c_{p+q}``."""
    if q < 0:
        raise ValueError("use moment_integral for negative powers")
    _check_axis(f, axis)
    if isinstance(f, ZSeries):
        return _zderiv(f, m, q)
    if axis == "z":
        return f.map(lambda u: _zderiv(u, m, q))
    if q > f.t_valid:
        raise OrderExhausted(f"cannot differentiate {q} times in t a series valid to t^{f.t_valid}")
    if q == 0:
        return f
    exact = f.exact and m.exact
    src = f if exact else f.inexact()
    N = src.N_t
    fac = _factors(m, range(0, N - q + 1), q, src.prec, exact)
    out = [src.coeffs[p + q].scale(fac[p]) for p in range(N - q + 1)]
    out += [ZSeries.zeros(src.N_z, prec=src.prec, exact=exact)] * q
    return TSeries(out, f.t_valid - q)


def moment_integral(f, m: SequenceHandle, axis: str = "z", i: int = 1, *, truncate: bool = False):
    """Apply ``i`` moment integrations: ``x^p -> m(p)/m(p+i) x^{p+i}``.

    With ``truncate=False`` a nonzero valid coefficient pushed past the nominal
    order raises :class:`TruncationOverflow`; with ``truncate=True`` it is
    dropped, as in any truncated power series computation.
    """
    if i < 0:
        raise ValueError("use moment_deriv for negative powers")
    _check_axis(f, axis)
    if isinstance(f, ZSeries):
        return _zinteg(f, m, i, truncate)
    if axis == "z":
        return f.map(lambda u: _zinteg(u, m, i, truncate))
    if i == 0:
        return f
    N = f.N_t
    if not truncate:
        for p in range(max(0, N - i + 1), f.t_valid + 1):
            if not f.coeffs[p].is_zero():
                raise TruncationOverflow(
                    f"t^{p} shifted by {i} exceeds nominal order {N}; pass truncate=True to drop it"
                )
    exact = f.exact and m.exact
    src = f if exact else f.inexact()
    zero = ZSeries.zeros(src.N_z, prec=src.prec, exact=exact)
    top = N - i
    if top < 0:
        return TSeries([zero] * (N + 1), N)
    fac = _factors(m, range(0, top + 1), i, src.prec, exact)
    if exact:
        inv = [1 / x for x in fac]
    else:
        with mp.workprec(src.prec):
            inv = [1 / x for x in fac]
    out = [zero] * i + [src.coeffs[p].scale(inv[p]) for p in range(top + 1)]
    return TSeries(out, min(f.t_valid + i, N))


def norm_rtilde(f: ZSeries, rt, r=None, upto: int | None = None) -> mpmath.mpf:
    """Weighted l1 norm ``sum_{n <= V} |c_n| rt^n``; the truncation of the disc norm.

    ``r`` is the coefficient disc radius (``0 < r < 1``) and ``rt`` must satisfy
    ``0 <= rt <= r``. Without ``r`` only ``0 <= rt < 1`` is required.
    """
    if r is not None and not (0 < r < 1):
        raise RadiusOutOfRange(f"disc radius must lie in (0, 1), got {r}")
    limit_ok = (0 <= rt <= r) if r is not None else (0 <= rt < 1)
    if not limit_ok:
        raise RadiusOutOfRange(f"rt={rt} outside the admissible range")
    V = f.valid if upto is None else min(upto, f.valid)
    with mp.workprec(f.prec):
        x = to_mp(rt, f.prec)
        acc = mpmath.mpf(0)
        w = mpmath.mpf(1)
        for n in range(V + 1):
            c = f.coeffs[n]
            if c != 0:
                acc += abs(to_mp(c, f.prec)) * w
            w *= x
        return acc
