import math

import pytest
from hypothesis import given, settings, strategies as st

from sdmac.dmregion import RateBounds
from sdmac.geom2d import NEG_INF, RatePolygon, from_supports, hull, includes, pentagon, support


def test_pentagon_examples():
    assert pentagon(RateBounds(1, 2)).vertices == ((0, 0), (2, 0), (1, 1), (0, 1))
    assert pentagon(RateBounds(3, 1)).vertices == ((0, 0), (1, 0), (0, 1))
    assert pentagon(RateBounds(1, -0.1)).is_empty
    assert pentagon(RateBounds(-0.1, 1)).is_empty


def test_hull_examples():
    assert hull([(0.3, 0.4)]).vertices == ((0.3, 0.4),)
    assert hull([(0, 0), (1, 1), (2, 2)]).vertices == ((0, 0), (2, 2))
    pts = list(pentagon(RateBounds(1, 2)).vertices) + list(pentagon(RateBounds(2, 2)).vertices)
    assert hull(pts).vertices == ((0, 0), (2, 0), (0, 2))
    assert hull([]).is_empty


def test_support_and_includes_examples():
    p = pentagon(RateBounds(1, 2))
    assert support(p, (1, 0)) == 2
    assert support(RatePolygon(), (1, 0)) == NEG_INF
    assert includes(p, p, 0)
    assert includes(p, pentagon(RateBounds(1, 1.5)), 1e-12)
    assert not includes(pentagon(RateBounds(1, 1.5)), p, 1e-12)
    assert includes(p, RatePolygon())
    assert not includes(RatePolygon(), p)


def test_degenerate_outer():
    pt = RatePolygon(((0.0, 0.0),))
    assert includes(pt, pt, 0)
    seg = RatePolygon(((0.0, 0.0), (1.0, 0.0)))
    assert includes(seg, RatePolygon(((0.5, 0.0),)), 0)
    assert not includes(seg, RatePolygon(((0.5, 0.1),)), 1e-9)


def test_polygon_validation():
    with pytest.raises(ValueError):
        RatePolygon(((-1.0, 0.0), (1.0, 0.0)))
    with pytest.raises(ValueError):
        RatePolygon(((0.0, 0.0), (0.0, 1.0), (1.0, 0.0)))  # clockwise
    with pytest.raises(ValueError):
        RatePolygon(((0.0, 0.0), (0.0, 0.0)))


def test_from_supports():
    dirs = [(1, 0), (0.5, 0.5), (0, 1)]
    poly = from_supports(dirs, [2, 1, 1])
    assert poly.vertices == ((0, 0), (2, 0), (1, 1), (0, 1))
    assert from_supports(dirs, [0, 0, 0]).vertices == ((0, 0),)
    assert from_supports(dirs, [1, NEG_INF, 1]).is_empty
    with pytest.raises(ValueError):
        from_supports([(1, 0)], [1])


coord = st.floats(0, 10, allow_nan=False)
points = st.lists(st.tuples(coord, coord), min_size=1, max_size=12)
dirs = st.tuples(st.floats(-1, 1), st.floats(-1, 1))


@settings(max_examples=100, deadline=None)
@given(points, dirs)
def test_support_of_hull_is_max(pts, d):
    expect = max(d[0] * x + d[1] * y for x, y in pts)
    assert math.isclose(support(hull(pts), d), expect, abs_tol=1e-9)


@settings(max_examples=100, deadline=None)
@given(points)
def test_hull_is_valid_and_contains_points(pts):
    h = hull(pts)
    assert includes(h, RatePolygon(()), 0)
    for p in pts:
        assert includes(h, RatePolygon((p,)), 1e-9)


@given(st.floats(0, 5), st.floats(0, 5), st.floats(0, 5), st.floats(0, 5))
def test_pentagon_monotone(a, b, da, db):
    assert includes(pentagon(RateBounds(a + da, b + db)), pentagon(RateBounds(a, b)), 0)


@settings(max_examples=60, deadline=None)
@given(points, points, points)
def test_includes_partial_order(p1, p2, p3):
    tol = 1e-9
    a, b, c = hull(p1), hull(p1 + p2), hull(p1 + p2 + p3)
    assert includes(a, a, tol)
    assert includes(b, a, tol) and includes(c, b, tol) and includes(c, a, tol)
    if includes(a, b, tol):
        # mutual inclusion: every vertex of each is within 2 tol of the other
        for v in b.vertices:
            assert includes(a, RatePolygon((v,)), 2 * tol)
