import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sdmac.gaussregion import (
    CorrPair,
    GaussianParams,
    gauss_bounds,
    gauss_cm_capacity,
    gauss_region,
    gauss_supports,
)
from sdmac.geom2d import RatePolygon, includes

DIRS = [(1, 0), (0.75, 0.25), (0.5, 0.5), (0.25, 0.75), (0, 1)]


def test_p1_zero_bounds():
    gp = GaussianParams(0, 1, 1, 1)
    rb = gauss_bounds(gp, CorrPair(0.3, -0.4))
    assert rb.a == 0.0
    assert rb.b == pytest.approx(0.5 * math.log2(1 + 1 / 2), abs=1e-15)


def test_bounds_formula_spot():
    gp = GaussianParams(2, 3, 1.5, 0.5)
    c = CorrPair(0.4, -0.3)
    resid = 2 * (1 - 0.16 - 0.09)
    a = 0.5 * math.log2(1 + resid / 0.5)
    sinr = (math.sqrt(3) + 0.4 * math.sqrt(2)) ** 2 / (resid + (math.sqrt(1.5) - 0.3 * math.sqrt(2)) ** 2 + 0.5)
    rb = gauss_bounds(gp, c)
    assert rb.a == pytest.approx(a, abs=1e-14)
    assert rb.b == pytest.approx(0.5 * math.log2(1 + sinr) + a, abs=1e-14)


def test_invalid_inputs():
    with pytest.raises(ValueError):
        CorrPair(0.9, -0.9)
    with pytest.raises(ValueError):
        CorrPair(-0.1, 0.0)
    with pytest.raises(ValueError):
        CorrPair(0.5, 0.1)
    with pytest.raises(ValueError):
        GaussianParams(1, 1, 1, 0)
    with pytest.raises(ValueError):
        gauss_region(GaussianParams(1, 1, 1, 1), grid_steps=1)


def test_p1_zero_region_is_segment():
    gp = GaussianParams(0, 1, 1, 1)
    poly = gauss_region(gp, 11, DIRS)
    assert len(poly.vertices) == 2
    assert poly.vertices[0] == (0.0, 0.0)
    assert poly.vertices[1][0] == pytest.approx(0.5 * math.log2(1.5), abs=1e-12)
    assert poly.vertices[1][1] == 0.0


def test_refinement_monotone():
    gp = GaussianParams(1, 1, 1, 1)
    coarse = gauss_supports(gp, 11, DIRS, refine=False)
    fine = gauss_supports(gp, 11, DIRS, refine=True)
    assert all(f.value >= c.value for f, c in zip(fine, coarse))
    assert includes(gauss_region(gp, 11, DIRS, True), gauss_region(gp, 11, DIRS, False), 0)


def test_support_witness_consistent():
    gp = GaussianParams(1, 2, 0.5, 1)
    for r in gauss_supports(gp, 21, DIRS):
        rb = gauss_bounds(gp, r.corr)
        assert (rb.a, rb.b) == pytest.approx((r.a, r.b), abs=1e-12)
        assert r.direction.wc * r.point[0] + r.direction.w1 * r.point[1] == pytest.approx(r.value, abs=1e-12)


TRIPLES = [(1, 1, 0), (1, 1, 1), (1, 2, 1), (2, 1, 1), (1, 1, 4)]


@pytest.mark.parametrize("p1, p2, q", TRIPLES)
def test_monotone_in_parameters(p1, p2, q):
    base = gauss_region(GaussianParams(p1, p2, q, 1), 21, DIRS)
    assert includes(base, gauss_region(GaussianParams(p1, p2, q + 1, 1), 21, DIRS), 1e-9)
    assert includes(gauss_region(GaussianParams(p1 + 1, p2, q, 1), 21, DIRS), base, 1e-9)
    assert includes(gauss_region(GaussianParams(p1, p2 + 1, q, 1), 21, DIRS), base, 1e-9)


@settings(max_examples=60, deadline=None)
@given(
    st.floats(0, 10), st.floats(0, 10), st.floats(0, 10), st.floats(0.1, 10),
    st.floats(0, 1), st.floats(0, 1), st.sampled_from([0.5, 2.0, 3.7]),
)
def test_scale_invariance(p1, p2, q, n, r, theta, lam):
    c = CorrPair(r * math.cos(theta * math.pi / 2), -r * math.sin(theta * math.pi / 2))
    gp = GaussianParams(p1, p2, q, n)
    a0, b0 = gauss_bounds(gp, c)
    a1, b1 = gauss_bounds(gp.scaled(lam), c)
    assert abs(a0 - a1) <= 1e-12 and abs(b0 - b1) <= 1e-12


def test_cm_capacity_q0_closed_form():
    # without state, full coherence gives log2(1 + (sqrt P1 + sqrt P2)^2 / N) / 2
    assert gauss_cm_capacity(GaussianParams(1, 1, 0, 1), 21) == pytest.approx(0.5 * math.log2(5), abs=1e-12)


def test_empty_region_not_possible():
    assert not gauss_region(GaussianParams(1, 1, 1, 1), 5, DIRS).is_empty
    assert isinstance(gauss_region(GaussianParams(0, 0, 1, 1), 5, DIRS), RatePolygon)
