import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import random_spec
from momentsum.dsl import ProblemSpec, closed_form_inv_k, has_errors, newton_polygon, slope_k, validate_spec
from momentsum.dsl.polygon import polygon_from_data
from momentsum.errors import NoPositiveSlope

F = Fraction


def test_kappa2_polygon():
    spec = ProblemSpec.build("u - (1) Dti[2] Dz[3] u - (z) Dti[1] Dz[1] u = f")
    pg = newton_polygon(spec)
    assert set(pg.points) == {(2, -2), (2, -1), (3, 0)}
    assert pg.dominated == ((2, -1),)
    assert pg.vertices == ((2, -2), (3, 0))
    assert slope_k(pg, spec) == 2


def test_heat_polygon():
    spec = ProblemSpec.build("u - (1) Dti[1] Dz[2] u = f")
    pg = newton_polygon(spec)
    assert pg.vertices == ((1, -1), (2, 0))
    assert slope_k(pg, spec) == 1


def test_no_slope_cases():
    spec = ProblemSpec.build("u - (1) Dti[1] u = f")
    pg = newton_polygon(spec)
    assert pg.k is None and pg.segments == ()
    with pytest.raises(NoPositiveSlope):
        slope_k(pg, spec)
    spec = ProblemSpec.build("u - (1) Dti[2] Dz[4] u = f", s2=F(1, 2))
    assert closed_form_inv_k(2, 4, 1, F(1, 2)) == 0
    with pytest.raises(NoPositiveSlope):
        slope_k(newton_polygon(spec), spec)


def test_closed_form():
    assert closed_form_inv_k(2, 3, 1, 1) == F(1, 2)
    assert closed_form_inv_k(1, 2, 1, 1) == 1


@given(st.integers(0, 2**32 - 1))
def test_hull_matches_closed_form(seed):
    spec = random_spec(random.Random(seed))
    assert not has_errors([f for f in validate_spec(spec) if f.code != "LcViolation"])
    op = spec.operator
    k = slope_k(newton_polygon(spec), spec)
    assert 1 / k == closed_form_inv_k(op.kappa, op.p_kappa, spec.s1, spec.s2)


@given(st.integers(1, 5), st.integers(0, 12), st.data())
def test_polygon_is_convex(kappa, pk, data):
    p = {kappa: pk}
    for i in range(1, kappa):
        if data.draw(st.booleans()):
            p[i] = data.draw(st.integers(0, 12))
    pg = polygon_from_data(kappa, p, 1, 1)
    slopes = [s for _, _, s in pg.segments]
    assert slopes == sorted(slopes)
    for x, y in pg.points:
        # every generating point sits on or above the boundary chain
        for (x0, y0), (x1, y1), s in pg.segments:
            if y0 <= y <= y1:
                assert x <= x0 + (y - y0) / s or (x, y) in pg.dominated or (x, y) in pg.vertices
