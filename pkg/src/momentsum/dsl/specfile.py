"""Problem-spec files (TOML) and the :class:`ProblemSpec` they describe.

Example::

    equation = "u - (1) Dti[1] Dz[2] u = f"
    m1 = { gevrey = 1 }
    m2 = { gevrey = 1 }
    base = { gevrey = 1 }
    s1 = 1
    s2 = 1
    r = 0.5
    f = { geometric_z = {} }
    nt = 40
    nz = 20

Rationals may be written as strings (``s2 = "1/2"``). Every key except
``equation`` has a default; unknown keys are rejected with their position.
"""

from __future__ import annotations

import math
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .._numeric import as_fraction, default_prec, fmt_scalar
from ..errors import SpecSyntaxError
from ..sequences import Gevrey, SequenceHandle, sequence_from_literal
from ..series import TSeries
from .grammar import OperatorSpec, format_equation, parse_equation

__all__ = ["ProblemSpec", "parse_problem", "load_problem", "f_from_literal", "DEFAULTS"]

DEFAULTS = {
    "s1": Fraction(1),
    "s2": Fraction(1),
    "r": Fraction(1, 2),
    "nt": 20,
    "nz": 10,
    "pmax": 12,
    "direction": 0.0,
}

_TOP_KEYS = {"equation", "m1", "m2", "base", "s1", "s2", "r", "f", "nt", "nz", "pmax",
             "direction", "precision"}
_F_KINDS = {"t_poly": set(), "geometric_z": {"ratio"}, "exponential_z": {"scale"}}


def f_from_literal(lit: dict, N_t: int, N_z: int, prec: int | None = None) -> TSeries:
    """Materialise a forcing literal at truncation orders ``(N_t, N_z)``."""
    (kind, val), = lit.items()
    if kind == "t_poly":
        rows = [[as_fraction(c) if not isinstance(c, float) else c for c in row] for row in val]
        return TSeries.from_rows(rows, N_t, N_z, prec=prec)
    if kind == "geometric_z":
        a = as_fraction(val.get("ratio", 1))
        return TSeries.from_rows([[a ** n for n in range(N_z + 1)]], N_t, N_z, prec=prec)
    if kind == "exponential_z":
        a = as_fraction(val.get("scale", 1))
        return TSeries.from_rows(
            [[a ** n / math.factorial(n) for n in range(N_z + 1)]], N_t, N_z, prec=prec
        )
    raise ValueError(f"unknown forcing literal {kind!r}")


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    operator: OperatorSpec
    m1: SequenceHandle
    m2: SequenceHandle
    base: SequenceHandle
    s1: Fraction = DEFAULTS["s1"]
    s2: Fraction = DEFAULTS["s2"]
    r: Fraction = DEFAULTS["r"]
    f: dict = field(default_factory=lambda: {"geometric_z": {}})
    nt: int = DEFAULTS["nt"]
    nz: int = DEFAULTS["nz"]
    pmax: int = DEFAULTS["pmax"]
    direction: float = DEFAULTS["direction"]
    precision: int = field(default_factory=default_prec)

    @classmethod
    def build(cls, equation: str | OperatorSpec, *, m1=None, m2=None, base=None, **kw) -> "ProblemSpec":
        """Programmatic constructor; sequences default to ``Gevrey(1)``."""
        op = equation if isinstance(equation, OperatorSpec) else parse_equation(equation)
        prec = kw.get("precision") or default_prec()
        kw["precision"] = prec
        for key in ("s1", "s2", "r"):
            if key in kw:
                kw[key] = as_fraction(kw[key])
        return cls(
            op,
            m1 or Gevrey(1, prec),
            m2 or Gevrey(1, prec),
            base or Gevrey(1, prec),
            **kw,
        )

    @property
    def kappa(self) -> int:
        return self.operator.kappa

    def f_series(self, N_t: int | None = None, N_z: int | None = None, prec: int | None = None) -> TSeries:
        return f_from_literal(
            self.f,
            self.nt if N_t is None else N_t,
            self.nz if N_z is None else N_z,
            self.precision if prec is None else prec,
        )

    def replace(self, **changes) -> "ProblemSpec":
        data = {k: getattr(self, k) for k in self.__dataclass_fields__}
        data.update(changes)
        return ProblemSpec(**data)

    def resolved(self) -> dict:
        """Fully explicit configuration, suitable for echoing into reports."""
        return {
            "equation": format_equation(self.operator),
            "m1": self.m1.literal(),
            "m2": self.m2.literal(),
            "base": self.base.literal(),
            "s1": fmt_scalar(self.s1),
            "s2": fmt_scalar(self.s2),
            "r": fmt_scalar(self.r),
            "f": _jsonable(self.f),
            "nt": self.nt,
            "nz": self.nz,
            "pmax": self.pmax,
            "direction": self.direction,
            "precision": self.precision,
        }


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, Fraction):
        return fmt_scalar(x)
    return x


def _key_position(text: str, key: str, after_line: int = 0) -> tuple[int, int]:
    pat = re.compile(rf"(^|[{{,\s])({re.escape(key)})\s*=")
    for n, line in enumerate(text.splitlines(), start=1):
        if n <= after_line:
            continue
        m = pat.search(line)
        if m:
            return n, m.start(2) + 1
    return 1, 1


def _equation_origin(text: str) -> tuple[int, int]:
    """Line and column of the first character inside the equation string."""
    for n, line in enumerate(text.splitlines(), start=1):
        m = re.match(r"\s*equation\s*=\s*(\"\"\"|'''|\"|')", line)
        if m:
            return n, m.end() + 1
    return 1, 1


def _fraction_field(data, key, text):
    val = data.get(key, DEFAULTS[key])
    try:
        out = as_fraction(val)
    except (TypeError, ValueError, ZeroDivisionError):
        line, col = _key_position(text, key)
        raise SpecSyntaxError(f"{key} must be a rational number", line, col, "int, decimal or 'p/q'")
    return out


def _int_field(data, key, text, default):
    val = data.get(key, default)
    if isinstance(val, bool) or not isinstance(val, int) or val < 0:
        line, col = _key_position(text, key)
        raise SpecSyntaxError(f"{key} must be a nonnegative integer", line, col, "integer")
    return val


def parse_problem(text: str, *, precision: int | None = None) -> ProblemSpec:
    """Parse a TOML problem description into a :class:`ProblemSpec`."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+), column (\d+)", str(exc))
        line, col = (int(m.group(1)), int(m.group(2))) if m else (1, 1)
        raise SpecSyntaxError(str(exc).split(" (at")[0], line, col) from None

    for key in data:
        if key not in _TOP_KEYS:
            line, col = _key_position(text, key)
            raise SpecSyntaxError(f"unknown key {key!r}", line, col, ", ".join(sorted(_TOP_KEYS)))
    if "equation" not in data:
        raise SpecSyntaxError("missing required key 'equation'", 1, 1, "equation = \"u - ... = f\"")

    try:
        op = parse_equation(data["equation"])
    except SpecSyntaxError as exc:
        l0, c0 = _equation_origin(text)
        line = l0 + exc.line - 1
        col = c0 + exc.col - 1 if exc.line == 1 else exc.col
        raise SpecSyntaxError(exc.message, line, col, exc.expected) from None

    prec = precision or data.get("precision") or default_prec()
    seqs = {}
    for key in ("m1", "m2", "base"):
        lit = data.get(key, {"gevrey": 1})
        try:
            seqs[key] = sequence_from_literal(lit, prec)
        except (ValueError, TypeError) as exc:
            line, col = _key_position(text, key)
            raise SpecSyntaxError(str(exc), line, col, "a sequence literal such as { gevrey = 1 }") from None

    f = data.get("f", {"geometric_z": {}})
    fl, fc = _key_position(text, "f")
    if not isinstance(f, dict) or len(f) != 1 or next(iter(f)) not in _F_KINDS:
        raise SpecSyntaxError("f must be one of t_poly, geometric_z, exponential_z", fl, fc,
                              "f = { geometric_z = {} }")
    kind, val = next(iter(f.items()))
    if kind == "t_poly":
        if not isinstance(val, list) or not all(isinstance(r, list) for r in val):
            raise SpecSyntaxError("t_poly must be a list of lists", fl, fc, "[[...], [...]]")
    else:
        if not isinstance(val, dict):
            raise SpecSyntaxError(f"{kind} takes a table of options", fl, fc, "{}")
        for sub in val:
            if sub not in _F_KINDS[kind]:
                line, col = _key_position(text, sub, fl - 1)
                raise SpecSyntaxError(f"unknown key {sub!r} in f.{kind}", line, col,
                                      ", ".join(sorted(_F_KINDS[kind])) or "no options")

    direction = data.get("direction", DEFAULTS["direction"])
    if isinstance(direction, bool) or not isinstance(direction, (int, float)):
        line, col = _key_position(text, "direction")
        raise SpecSyntaxError("direction must be a real number (radians)", line, col, "float")

    return ProblemSpec(
        operator=op,
        m1=seqs["m1"],
        m2=seqs["m2"],
        base=seqs["base"],
        s1=_fraction_field(data, "s1", text),
        s2=_fraction_field(data, "s2", text),
        r=_fraction_field(data, "r", text),
        f=f,
        nt=_int_field(data, "nt", text, DEFAULTS["nt"]),
        nz=_int_field(data, "nz", text, DEFAULTS["nz"]),
        pmax=_int_field(data, "pmax", text, DEFAULTS["pmax"]),
        direction=float(direction),
        precision=int(prec),
    )


def load_problem(path, *, precision: int | None = None) -> ProblemSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_problem(fh.read(), precision=precision)
