"""JSON report encoding and figure files (SVG polygon, CSV tables)."""

from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction
from pathlib import Path

import mpmath

from ._numeric import fmt_scalar
from .errors import IoError

SCHEMA_VERSION = "1.0"


def to_jsonable(x):
    """Recursively convert library values to JSON-safe data with stable text for numbers."""
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, Fraction):
        return fmt_scalar(x)
    if isinstance(x, (mpmath.mpf, mpmath.mpc)):
        return fmt_scalar(x, 30)
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return float(repr(x))
    if hasattr(x, "as_dict"):
        return to_jsonable(x.as_dict())
    return str(x)


def _write(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def write_json(path: Path, data) -> None:
    _write(path, json.dumps(to_jsonable(data), indent=2, sort_keys=True) + "\n")


def series_rows(u, digits: int = 30) -> list:
    """Coefficients nested by t then z index."""
    return [[fmt_scalar(c, digits) for c in row.coeffs[: row.valid + 1]] for row in u.coeffs[: u.t_valid + 1]]


def polygon_dict(pg) -> dict:
    pt = lambda p: [fmt_scalar(p[0]), fmt_scalar(p[1])]  # noqa: E731
    return {
        "points": [{"i": i, "xy": pt(p)} for i, p in zip(pg.labels, pg.points)],
        "dominated": [pt(p) for p in pg.dominated],
        "vertices": [pt(p) for p in pg.vertices],
        "segments": [{"from": pt(a), "to": pt(b), "slope": fmt_scalar(s)} for a, b, s in pg.segments],
        "k": None if pg.k is None else fmt_scalar(pg.k),
    }


def polygon_svg(pg, path: Path, width: int = 480, height: int = 360) -> None:
    """Generating points, dominated points in gray, boundary chain with its two rays, slope label."""
    xs = [float(p[0]) for p in pg.points]
    ys = [float(p[1]) for p in pg.points]
    x0, x1 = min(xs) - 1.5, max(xs) + 1.0
    y0, y1 = min(ys) - 1.0, max(ys) + 1.5
    pad = 40

    def X(x):
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def Y(y):
        return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{Y(0):.2f}" x2="{width - pad}" y2="{Y(0):.2f}" stroke="#bbb"/>',
        f'<line x1="{X(0):.2f}" y1="{pad}" x2="{X(0):.2f}" y2="{height - pad}" stroke="#bbb"/>',
    ]
    verts = [(float(a), float(b)) for a, b in pg.vertices]
    if verts:
        lo, hi = verts[0], verts[-1]
        chain = [(x0, lo[1])] + verts + [(hi[0], y1)]
        d = " ".join(f"{X(x):.2f},{Y(y):.2f}" for x, y in chain)
        out.append(f'<polyline points="{d}" fill="none" stroke="#1f4e9c" stroke-width="2"/>')
    dominated = {(float(a), float(b)) for a, b in pg.dominated}
    for (x, y), i in zip(zip(xs, ys), pg.labels):
        color = "#999" if (x, y) in dominated else "#c0392b"
        out.append(f'<circle cx="{X(x):.2f}" cy="{Y(y):.2f}" r="4" fill="{color}"/>')
        label = "id" if i == 0 else f"i={i}"
        out.append(f'<text x="{X(x) + 6:.2f}" y="{Y(y) - 6:.2f}" font-size="11" fill="{color}">{label}</text>')
    if pg.k is not None:
        (a, b, s), = pg.segments
        mx, my = (float(a[0]) + float(b[0])) / 2, (float(a[1]) + float(b[1])) / 2
        out.append(f'<text x="{X(mx) + 8:.2f}" y="{Y(my):.2f}" font-size="13" fill="#1f4e9c">k = {fmt_scalar(s)}</text>')
    out.append("</svg>")
    _write(path, "\n".join(out) + "\n")


def growth_csv(path: Path, rows) -> None:
    """``rows``: iterable of ``(p, log_norm, fitted)``; header only when empty."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["p", "log_norm", "fitted"])
    for p, ln, fit in rows:
        w.writerow([p, repr(float(ln)), repr(float(fit))])
    _write(path, buf.getvalue())


def borel_csv(path: Path, coeffs) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["p", "coefficient_z0"])
    for p, c in enumerate(coeffs):
        w.writerow([p, fmt_scalar(c, 30)])
    _write(path, buf.getvalue())


def rows_csv(path: Path, fields: list, rows: list) -> None:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    _write(path, buf.getvalue())
