"""Recursive-descent parser for operator equations.

Grammar (whitespace-insensitive)::

    equation := "u" { "-" term } "=" "f"
    term     := [ "(" poly ")" ] "Dti[" int "]" [ "Dz[" int "]" ] "u"
    poly     := sum of products of rational literals and powers of z,
                with "+", "-", "*", "/", "^", parentheses and
                implicit multiplication ("3z", "2(1+z)")

A term ``(a) Dti[i] Dz[q] u`` stands for ``a(z) * d_{m1,t}^{-i} d_{m2,z}^{q} u``.
Coefficients are kept as exact rational polynomials.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

from ..errors import SemanticError, SpecSyntaxError
from ..series import ZSeries

__all__ = ["OperatorSpec", "parse_equation", "format_equation", "format_poly", "Poly"]

Poly = tuple  # tuple of Fractions, index = power of z, no trailing zeros


def _trim(cs) -> Poly:
    cs = list(cs)
    while cs and cs[-1] == 0:
        cs.pop()
    return tuple(Fraction(c) for c in cs)


def _padd(a: Poly, b: Poly) -> Poly:
    n = max(len(a), len(b))
    return _trim((a[j] if j < len(a) else 0) + (b[j] if j < len(b) else 0) for j in range(n))


def _pneg(a: Poly) -> Poly:
    return tuple(-c for c in a)


def _pmul(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return ()
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return _trim(out)


@dataclass(frozen=True)
class OperatorSpec:
    """``1 - sum a_iq(z) d_{m1,t}^{-i} d_{m2,z}^{q}`` with polynomial coefficients."""

    terms: tuple  # ((i, q, poly), ...) sorted by (i, q)
    kappa: int = field(init=False)
    K: tuple = field(init=False)
    p: dict = field(init=False, compare=False, hash=False)

    def __post_init__(self):
        terms = tuple(sorted((int(i), int(q), _trim(a)) for i, q, a in self.terms))
        if not terms:
            raise SemanticError("the operator needs at least one term")
        seen = set()
        for i, q, _ in terms:
            if i < 1:
                raise SemanticError(f"Dti index must be >= 1, got {i}")
            if q < 0:
                raise SemanticError(f"Dz index must be >= 0, got {q}")
            if (i, q) in seen:
                raise SemanticError(f"duplicate term with Dti[{i}] Dz[{q}]")
            seen.add((i, q))
        K = tuple(sorted({i for i, _, _ in terms}))
        p = {i: max(q for j, q, _ in terms if j == i) for i in K}
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "kappa", K[-1])
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "p", p)

    @property
    def p_kappa(self) -> int:
        return self.p[self.kappa]

    @property
    def q_max(self) -> int:
        return max(self.p.values())

    def coeff(self, i: int, q: int) -> Poly:
        for j, r, a in self.terms:
            if (j, r) == (i, q):
                return a
        return ()

    def leading(self) -> Poly:
        """``a_{kappa, p_kappa}``."""
        return self.coeff(self.kappa, self.p_kappa)

    def coeff_series(self, i: int, q: int, N_z: int, prec: int | None = None) -> ZSeries:
        return ZSeries.from_poly(list(self.coeff(i, q)) or [0], N_z, prec=prec)

    def __str__(self) -> str:
        return format_equation(self)


# -- tokenizer -------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<num>\d+(?:\.\d*)?|\.\d+)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()=\[\]])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # num, name, op, eof
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise SpecSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        s = m.group()
        if kind != "ws":
            toks.append(_Tok(kind, s, line, col))
        for ch in s:
            if ch == "\n":
                line, col = line + 1, 1
            else:
                col += 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def fail(self, expected: str, tok: _Tok | None = None):
        tok = tok or self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise SpecSyntaxError(f"unexpected {found}", tok.line, tok.col, expected)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "name") and self.tok.text == text

    def expect(self, text: str) -> _Tok:
        if not self.at(text):
            self.fail(repr(text))
        t = self.tok
        self.i += 1
        return t

    def integer(self) -> int:
        t = self.tok
        if t.kind != "num" or not t.text.isdigit():
            self.fail("a nonnegative integer")
        self.i += 1
        return int(t.text)

    # equation := "u" { "-" term } "=" "f"
    def equation(self) -> OperatorSpec:
        self.expect("u")
        terms = []
        while self.at("-"):
            self.i += 1
            terms.append(self.term())
        self.expect("=")
        self.expect("f")
        if self.tok.kind != "eof":
            self.fail("end of equation")
        seen = {}
        for i, q, a, tok in terms:
            if i < 1:
                raise SemanticError(f"line {tok.line}, col {tok.col}: Dti index must be >= 1, got {i}")
            if (i, q) in seen:
                raise SemanticError(
                    f"line {tok.line}, col {tok.col}: duplicate term Dti[{i}] Dz[{q}]"
                )
            seen[(i, q)] = a
        if not terms:
            raise SemanticError("the operator needs at least one term")
        return OperatorSpec(tuple((i, q, a) for (i, q), a in seen.items()))

    # term := [ "(" poly ")" ] "Dti[" int "]" [ "Dz[" int "]" ] "u"
    def term(self):
        start = self.tok
        a: Poly = (Fraction(1),)
        if self.at("("):
            self.i += 1
            a = self.poly()
            self.expect(")")
        if not self.at("Dti"):
            self.fail("'Dti[' or a parenthesised coefficient")
        self.i += 1
        self.expect("[")
        i = self.integer()
        self.expect("]")
        q = 0
        if self.at("Dz"):
            self.i += 1
            self.expect("[")
            q = self.integer()
            self.expect("]")
        self.expect("u")
        return i, q, a, start

    # poly := ["+"|"-"] product { ("+"|"-") product }
    def poly(self) -> Poly:
        sign = 1
        if self.at("+") or self.at("-"):
            sign = -1 if self.tok.text == "-" else 1
            self.i += 1
        acc = self.product()
        if sign < 0:
            acc = _pneg(acc)
        while self.at("+") or self.at("-"):
            neg = self.tok.text == "-"
            self.i += 1
            rhs = self.product()
            acc = _padd(acc, _pneg(rhs) if neg else rhs)
        return acc

    def _starts_factor(self) -> bool:
        t = self.tok
        return t.kind == "num" or (t.kind == "name" and t.text == "z") or self.at("(")

    # product := power { ("*"|"/") power | power }
    def product(self) -> Poly:
        acc = self.power()
        while True:
            if self.at("*"):
                self.i += 1
                acc = _pmul(acc, self.power())
            elif self.at("/"):
                tok = self.tok
                self.i += 1
                d = self.power()
                if len(d) != 1:
                    if not d:
                        raise SemanticError(f"line {tok.line}, col {tok.col}: division by zero")
                    raise SemanticError(
                        f"line {tok.line}, col {tok.col}: coefficients must be polynomials in z"
                    )
                acc = tuple(c / d[0] for c in acc)
            elif self._starts_factor():
                acc = _pmul(acc, self.power())
            else:
                return acc

    # power := atom [ "^" int ]
    def power(self) -> Poly:
        base = self.atom()
        if self.at("^"):
            self.i += 1
            n = self.integer()
            out: Poly = (Fraction(1),)
            for _ in range(n):
                out = _pmul(out, base)
            return out
        return base

    def atom(self) -> Poly:
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return _trim([Fraction(t.text)])
        if t.kind == "name" and t.text == "z":
            self.i += 1
            return (Fraction(0), Fraction(1))
        if self.at("("):
            self.i += 1
            inner = self.poly()
            self.expect(")")
            return inner
        if self.at("-"):
            self.i += 1
            return _pneg(self.power())
        self.fail("a number, 'z' or '('")


def parse_equation(text: str) -> OperatorSpec:
    """Parse an equation such as ``u - (2+z) Dti[2] Dz[3] u - (z) Dti[1] Dz[1] u = f``."""
    return _Parser(text).equation()


def _frac(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_poly(a: Poly) -> str:
    """Canonical text of a coefficient polynomial; reparses to the same value."""
    if not a:
        return "0"
    parts = []
    for n, c in enumerate(a):
        if c == 0:
            continue
        mag = abs(c)
        if n == 0:
            body = _frac(mag)
        else:
            zpart = "z" if n == 1 else f"z^{n}"
            body = zpart if mag == 1 else f"{_frac(mag)}*{zpart}"
        if not parts:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append(("- " if c < 0 else "+ ") + body)
    return " ".join(parts)


def format_equation(op: OperatorSpec) -> str:
    out = ["u"]
    for i, q, a in sorted(op.terms, key=lambda t: (-t[0], -t[1])):
        dz = f" Dz[{q}]" if q else ""
        out.append(f"- ({format_poly(a)}) Dti[{i}]{dz} u")
    return " ".join(out) + " = f"


def iter_terms(op: OperatorSpec) -> Iterator[tuple[int, int, Poly]]:
    yield from op.terms
