import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sdmac.auxsearch import (
    Direction,
    SearchConfig,
    ascent_starts,
    candidate_pool,
    cm_capacity_search,
    coordinate_ascent,
    default_directions,
    pentagon_support,
    resolve_caps,
    simplex_grid,
    support_value,
    trace_region,
    trace_supports,
)
from sdmac.binexample import cb_capacity
from sdmac.dmregion import RateBounds, cm_capacity_value, inner_bounds, outer_bounds_t3
from sdmac.geom2d import includes, pentagon, support
from sdmac.infocore import binary_entropy
from sdmac.macmodel import binary_example_channel, deterministic_channel, induced_input_dist, random_channel

from conftest import structured_aux

FAST = SearchConfig(levels=2, restarts=4, max_iters=1, ascent_restarts=1)
DIRS5 = default_directions(5)


def test_simplex_grid_examples():
    assert simplex_grid(2, 2).tolist() == [[0, 1], [0.5, 0.5], [1, 0]]
    assert simplex_grid(1, 7).tolist() == [[1.0]]
    assert len(simplex_grid(3, 2)) == 6
    with pytest.raises(ValueError):
        simplex_grid(40, 40)


@given(st.integers(1, 5), st.integers(1, 6))
def test_simplex_grid_count_and_mass(dim, levels):
    g = simplex_grid(dim, levels)
    assert len(g) == math.comb(levels + dim - 1, dim - 1)
    assert np.allclose(g.sum(axis=1), 1.0)
    assert [tuple(r) for r in g] == sorted(tuple(r) for r in g)


@given(st.floats(-1, 3), st.floats(-1, 3), st.floats(0, 1))
def test_pentagon_support_matches_geometry(a, b, t):
    d = Direction(t, 1 - t) if t not in (0.0,) else Direction(0, 1)
    val, rc, r1 = pentagon_support(a, b, d.wc, d.w1)
    assert float(val) == pytest.approx(support(pentagon(RateBounds(a, b)), tuple(d)), abs=1e-12)
    if np.isfinite(val):
        assert d.wc * rc + d.w1 * r1 == pytest.approx(float(val), abs=1e-12)


def test_direction_normalized():
    assert tuple(Direction(2, 2)) == (0.5, 0.5)
    with pytest.raises(ValueError):
        Direction(0, 0)
    with pytest.raises(ValueError):
        Direction(-1, 1)


def test_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(levels=1)


def test_caps(bec01):
    assert resolve_caps(bec01, SearchConfig()) == (4, 3)
    assert resolve_caps(bec01, SearchConfig(), constrained=True) == (4, 4)
    with pytest.raises(ValueError):
        resolve_caps(bec01, SearchConfig(caps=(4, 10)))
    assert resolve_caps(bec01, SearchConfig(caps=(4, 10), allow_large_caps=True)) == (4, 10)


def test_constant_channel(constant_channel):
    val, _ = support_value(constant_channel, FAST, (0.5, 0.5))
    assert val == 0.0
    assert trace_region(constant_channel, FAST, DIRS5).vertices == ((0.0, 0.0),)


def test_rc_direction_is_max_b(bec01):
    cfg = SearchConfig(levels=2, restarts=4, max_iters=0)
    nu, nv = resolve_caps(bec01, cfg)
    pool = candidate_pool(bec01, cfg, nu, nv)
    val, _ = support_value(bec01, cfg, (1, 0))
    assert val == max(0.0, float(pool.b.max()))


def test_binary_r1_support(bec01):
    val, w = support_value(bec01, SearchConfig(levels=2, restarts=0, max_iters=0), (0, 1))
    assert val == pytest.approx(1 - binary_entropy(0.1), abs=1e-9)
    assert inner_bounds(bec01, w).a == pytest.approx(val, abs=1e-12)


def test_noiseless_two_user_sum_rate():
    ch = deterministic_channel([1.0], 2, 2, 4, lambda x1, x2, s: 2 * x1 + x2)
    res = trace_supports(ch, SearchConfig(levels=2, restarts=0, max_iters=0), [(1, 0), (0.5, 0.5)])
    assert res[0].value == pytest.approx(2.0, abs=1e-12)
    assert res[1].value == pytest.approx(1.0, abs=1e-12)


def test_nested_configs_give_nested_polygons():
    ch = random_channel(np.random.default_rng(7))
    coarse = SearchConfig(levels=2, restarts=4, max_iters=1, ascent_restarts=1)
    fine = SearchConfig(levels=4, restarts=12, max_iters=1, ascent_restarts=1)
    assert includes(trace_region(ch, fine, DIRS5), trace_region(ch, coarse, DIRS5), 1e-9)


def test_witness_reproduces_support():
    ch = random_channel(np.random.default_rng(8))
    for r in trace_supports(ch, FAST, DIRS5):
        rb = inner_bounds(ch, r.witness)
        val = pentagon_support(rb.a, rb.b, r.direction.wc, r.direction.w1)[0]
        assert abs(float(val) - r.value) <= 1e-12


def test_constrained_never_exceeds_unconstrained():
    ch = random_channel(np.random.default_rng(9))
    unc, con = trace_supports(ch, FAST, DIRS5, both=True)
    for u, c in zip(unc, con):
        assert c.value <= u.value


def test_parallel_matches_serial():
    ch = random_channel(np.random.default_rng(10))
    serial = trace_supports(ch, FAST, DIRS5, jobs=1)
    parallel = trace_supports(ch, FAST, DIRS5, jobs=2)
    assert [(r.value, r.point, r.index) for r in serial] == [(r.value, r.point, r.index) for r in parallel]


def test_input_constraint_respected():
    ch = binary_example_channel(0.1, q1=0.2)
    val, w = support_value(ch, SearchConfig(levels=4, restarts=8, max_iters=1), (0, 1))
    assert val <= cb_capacity(0.1, 0.2) + 1e-9
    d = induced_input_dist(ch, w)
    ex1 = float(np.einsum("s,x,xs->", ch.prior, d.px2, d.px1_given_x2s[:, :, 1]))
    assert ex1 <= 0.2 + 1e-12


def test_coordinate_ascent_monotone(bec01):
    aux0 = ascent_starts(bec01, FAST, 4, 3)[0]
    _, trace = coordinate_ascent(bec01, aux0, Direction(0, 1), 3, return_trace=True)
    assert all(b >= a for a, b in zip(trace, trace[1:]))
    grid_only, _ = support_value(bec01, SearchConfig(levels=2, restarts=0, max_iters=0), (0, 1))
    final = coordinate_ascent(bec01, aux0, Direction(0, 1), 3)
    assert inner_bounds(bec01, final).a >= grid_only - 1e-12


def test_coordinate_ascent_keeps_optimum(bec01):
    aux = structured_aux()
    out = coordinate_ascent(bec01, aux, Direction(0, 1), 2)
    for f in ("px2", "pv_given_sx2", "pux1_given_svx2"):
        assert np.array_equal(getattr(out, f), getattr(aux, f))


def test_cm_capacity_search(constant_channel):
    cfg = SearchConfig(levels=2, restarts=2, max_iters=1, ascent_restarts=1)
    assert cm_capacity_search(constant_channel, cfg)[0] == pytest.approx(0.0, abs=1e-12)
    y_is_x2 = deterministic_channel([0.5, 0.5], 2, 2, 2, lambda x1, x2, s: x2)
    val, w = cm_capacity_search(y_is_x2, cfg)
    assert val == pytest.approx(1.0, abs=1e-6)
    assert cm_capacity_value(y_is_x2, w) == pytest.approx(val, abs=1e-12)


def test_cm_capacity_below_outer_bound():
    ch = random_channel(np.random.default_rng(11))
    cfg = SearchConfig(levels=2, restarts=8, max_iters=1, ascent_restarts=1)
    val, w = cm_capacity_search(ch, cfg)
    d = induced_input_dist(ch, w.as_aux())
    assert val <= outer_bounds_t3(ch, d).b + 1e-9
