"""Newton polygon of a moment operator and its distinguished slope.

Each term index ``i`` contributes the quadrant ``{x <= a, y >= b}`` attached to
the point ``(a, b) = ((kappa - i) s1 + p_i s2, i - kappa)``, and the identity
part contributes ``(kappa s1, -kappa)``. The polygon is the convex hull of the
union of these quadrants; its boundary is a lower convex chain between a
horizontal ray on the left and a vertical ray on the right.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .._numeric import as_fraction
from ..errors import MultiplePositiveSlopes, NoPositiveSlope, SlopeConsistencyError

__all__ = [
    "NewtonPolygon",
    "newton_polygon",
    "polygon_from_data",
    "hull_chain",
    "slope_k",
    "closed_form_inv_k",
]

Point = tuple  # (Fraction, Fraction)


@dataclass(frozen=True)
class NewtonPolygon:
    points: tuple          # generating points, identity point first
    labels: tuple          # term index i per point, 0 for the identity point
    dominated: tuple       # generating points dropped by the dominance filter
    vertices: tuple        # boundary chain, strictly increasing in x and y
    segments: tuple        # ((x0, y0), (x1, y1), slope)
    k: Fraction | None

    @property
    def inv_k(self) -> Fraction | None:
        return None if self.k is None else 1 / self.k


def _dominates(q: Point, p: Point) -> bool:
    """``p`` lies inside the quadrant of ``q``."""
    return q != p and q[0] >= p[0] and q[1] <= p[1]


def _cross(o: Point, a: Point, b: Point) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def hull_chain(points: Iterable[Point]) -> tuple[tuple, tuple]:
    """Boundary vertices and dropped points for the hull of the quadrants at ``points``."""
    pts = sorted({(Fraction(x), Fraction(y)) for x, y in points})
    keep = [p for p in pts if not any(_dominates(q, p) for q in pts)]
    dropped = tuple(p for p in pts if p not in keep)
    # lower chain: slopes must strictly increase; collinear middles are merged
    chain: list[Point] = []
    for p in keep:
        while len(chain) >= 2 and _cross(chain[-2], chain[-1], p) <= 0:
            chain.pop()
        chain.append(p)
    return tuple(chain), dropped


def polygon_from_data(kappa: int, p: Mapping[int, int], s1, s2) -> NewtonPolygon:
    s1, s2 = as_fraction(s1), as_fraction(s2)
    pts = [(kappa * s1, Fraction(-kappa))]
    labels = [0]
    for i in sorted(p):
        pts.append(((kappa - i) * s1 + p[i] * s2, Fraction(i - kappa)))
        labels.append(i)
    chain, dropped = hull_chain(pts)
    segs = tuple(
        (a, b, (b[1] - a[1]) / (b[0] - a[0])) for a, b in zip(chain, chain[1:])
    )
    k = segs[0][2] if len(segs) == 1 else None
    # hull_chain dedups; report dropped points once each, in generating order
    dropped = tuple(q for q in dict.fromkeys(pts) if q in dropped)
    return NewtonPolygon(tuple(pts), tuple(labels), dropped, chain, segs, k)


def newton_polygon(spec) -> NewtonPolygon:
    """Polygon of a problem spec (anything with ``operator``, ``s1`` and ``s2``)."""
    op = spec.operator
    return polygon_from_data(op.kappa, op.p, spec.s1, spec.s2)


def closed_form_inv_k(kappa: int, p_kappa: int, s1, s2) -> Fraction:
    """``1/k = (s2 p_kappa - s1 kappa) / kappa``."""
    return (as_fraction(s2) * p_kappa - as_fraction(s1) * kappa) / kappa


def slope_k(polygon: NewtonPolygon, spec) -> Fraction:
    """The unique positive boundary slope, cross-checked against the closed form."""
    op = spec.operator
    if not polygon.segments:
        raise NoPositiveSlope("the polygon boundary has no segment of positive slope")
    if len(polygon.segments) > 1:
        slopes = ", ".join(str(s) for _, _, s in polygon.segments)
        raise MultiplePositiveSlopes(f"boundary has several positive slopes: {slopes}")
    k = polygon.segments[0][2]
    inv = closed_form_inv_k(op.kappa, op.p_kappa, spec.s1, spec.s2)
    if inv <= 0 or 1 / inv != k:
        raise SlopeConsistencyError(
            f"hull slope {k} disagrees with closed form 1/k = {inv}"
        )
    return k
