import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sdmac.infocore import (
    DomainError,
    JointPmf,
    Pmf,
    binary_convolution,
    binary_entropy,
    cond_mutual_information as cmi,
    entropy,
)


def h_ref(a):
    return -sum(t * math.log2(t) for t in (a, 1 - a) if t > 0)


def test_binary_entropy_examples():
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    assert binary_entropy(0.11) == pytest.approx(0.499916, abs=5e-7)


@pytest.mark.parametrize("bad", [-0.1, 1.5, float("nan")])
def test_binary_entropy_domain(bad):
    with pytest.raises(DomainError):
        binary_entropy(bad)


def test_binary_convolution_examples():
    for q in (0.0, 0.3, 1.0):
        assert binary_convolution(0.5, q) == 0.5
        assert binary_convolution(0.0, q) == q
    assert binary_convolution(0.1, 0.2) == pytest.approx(0.26, abs=1e-15)
    with pytest.raises(DomainError):
        binary_convolution(1.2, 0.1)


@given(st.floats(0, 0.5), st.floats(0, 0.5))
def test_binary_convolution_envelope(p, q):
    assert binary_convolution(p, q) >= max(p, q) - 1e-12


def test_entropy_examples():
    assert entropy(JointPmf(("A",), [0.5, 0.5]), "A") == 1.0
    assert entropy(JointPmf(("A",), [0.0, 1.0]), "A") == 0.0
    # 30-digit evaluation of h(0.26) is 0.8267463724926...
    assert entropy(JointPmf(("A",), [0.26, 0.74]), "A") == pytest.approx(0.8267463725, abs=1e-10)
    assert entropy(JointPmf(("A",), [0.26, 0.74]), "A") == pytest.approx(h_ref(0.26), abs=1e-15)


def test_entropy_unknown_variable():
    with pytest.raises(KeyError):
        entropy(JointPmf(("A",), [0.5, 0.5]), "B")


def test_cmi_examples():
    indep = JointPmf(("A", "B"), np.full((2, 2), 0.25))
    assert cmi(indep, "A", "B") == 0.0
    copy = JointPmf(("A", "B"), np.eye(2) / 2)
    assert cmi(copy, "A", "B") == pytest.approx(1.0, abs=1e-15)
    p = 0.1
    bsc = JointPmf(("X", "Y"), 0.5 * np.array([[1 - p, p], [p, 1 - p]]))
    assert cmi(bsc, "X", "Y") == pytest.approx(0.531004406, abs=1e-9)


def test_cmi_overlap_and_empty():
    j = JointPmf(("A", "B", "C"), np.full((2, 2, 2), 0.125))
    with pytest.raises(ValueError):
        cmi(j, "A", ("A", "B"))
    with pytest.raises(ValueError):
        cmi(j, "A", "B", "A")
    with pytest.raises(ValueError):
        cmi(j, (), "B")


def test_joint_validation():
    with pytest.raises(ValueError):
        JointPmf(("A",), [0.6, 0.6])
    with pytest.raises(ValueError):
        JointPmf(("A", "A"), np.full((2, 2), 0.25))
    with pytest.raises(ValueError):
        JointPmf(("A",), np.full((2, 2), 0.25))
    with pytest.raises(ValueError):
        Pmf([0.5, -0.1, 0.6])
    assert len(Pmf([0.2, 0.8])) == 2


def test_table_size_cap():
    with pytest.raises(ValueError):
        JointPmf(tuple("ABCDEFGH"), np.full((8,) * 8, 8.0**-8))


NAMES = ("A", "B", "C", "D")


@st.composite
def joints(draw):
    shape = tuple(draw(st.integers(1, 3)) for _ in NAMES)
    n = int(np.prod(shape))
    w = draw(st.lists(st.floats(0, 1), min_size=n, max_size=n))
    w = np.array(w) + 1e-3 * draw(st.integers(0, 1))
    if w.sum() <= 0:
        w = np.ones(n)
    return JointPmf(NAMES, (w / w.sum()).reshape(shape))


def _partitions():
    out = []
    for a in NAMES:
        rest = [x for x in NAMES if x != a]
        for r in range(1, len(rest)):
            for b in itertools.combinations(rest, r):
                cands = [x for x in rest if x not in b]
                for k in range(1, len(cands) + 1):
                    for c in itertools.combinations(cands, k):
                        out.append((a, b, c))
    return out


PARTS = _partitions()


@settings(max_examples=60, deadline=None)
@given(joints(), st.sampled_from(PARTS))
def test_chain_rule(j, part):
    a, b, c = part
    lhs = cmi(j, a, b + c, clamp=False)
    rhs = cmi(j, a, c, clamp=False) + cmi(j, a, b, c, clamp=False)
    assert abs(lhs - rhs) <= 1e-10


@settings(max_examples=60, deadline=None)
@given(joints(), st.sampled_from(PARTS))
def test_nonnegativity_and_subadditivity(j, part):
    a, b, c = part
    assert cmi(j, a, b, c, clamp=False) >= -1e-12
    group = (a,) + b
    assert entropy(j, group) <= sum(entropy(j, g) for g in group) + 1e-10


@settings(max_examples=40, deadline=None)
@given(joints(), st.sets(st.sampled_from(NAMES), min_size=1))
def test_marginal_preserves_mass(j, group):
    m = j.marginal(sorted(group))
    assert abs(m.table.sum() - 1.0) <= 1e-12
