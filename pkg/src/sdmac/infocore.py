"""Entropy and mutual information over dense finite-alphabet joint tables.

All quantities are in bits. Mutual informations are assembled from joint
entropy atoms H(subset), the same representation the symbolic ``fme``
module works with.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

MASS_TOL = 1e-12
ZERO_PROB = 1e-15
MAX_TABLE_SIZE = 10**7


class DomainError(ValueError):
    """Argument outside the domain of a probability function."""


def _check_prob(name: str, x: float) -> float:
    x = float(x)
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"{name}={x} is not a probability")
    return x


def binary_entropy(alpha: float) -> float:
    alpha = _check_prob("alpha", alpha)
    h = 0.0
    for t in (alpha, 1.0 - alpha):
        if t > 0.0:
            h -= t * np.log2(t)
    return float(h)


def binary_convolution(p: float, q: float) -> float:
    """Crossover probability of two cascaded binary symmetric channels."""
    p = _check_prob("p", p)
    q = _check_prob("q", q)
    return p * (1.0 - q) + q * (1.0 - p)


def entropy_of_probs(probs: np.ndarray) -> float:
    """Shannon entropy of a flat probability array (0 log 0 = 0)."""
    p = np.asarray(probs, dtype=float).ravel()
    p = p[p > ZERO_PROB]
    return float(-np.sum(p * np.log2(p)))


@dataclass(frozen=True)
class Pmf:
    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("Pmf needs a nonempty 1-d array")
        if np.any(p < 0) or abs(p.sum() - 1.0) > MASS_TOL:
            raise ValueError(f"not a probability vector: {p}")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def __len__(self):
        return self.probs.size


@dataclass(frozen=True)
class JointPmf:
    """Dense joint distribution; axis ``i`` of ``table`` is ``names[i]``."""

    names: tuple
    table: np.ndarray

    def __post_init__(self):
        names = tuple(self.names)
        t = np.array(self.table, dtype=float)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names: {names}")
        if t.ndim != len(names):
            raise ValueError(f"table has {t.ndim} axes for {len(names)} variables")
        if t.size > MAX_TABLE_SIZE:
            raise ValueError(f"joint table too large ({t.size} > {MAX_TABLE_SIZE} entries)")
        if np.any(t < 0) or abs(t.sum() - 1.0) > MASS_TOL:
            raise ValueError("joint table is not a probability distribution")
        t.setflags(write=False)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "table", t)

    @property
    def sizes(self) -> dict:
        return dict(zip(self.names, self.table.shape))

    def axes(self, group: Iterable[str]) -> tuple:
        idx = []
        for g in group:
            try:
                idx.append(self.names.index(g))
            except ValueError:
                raise KeyError(f"unknown variable {g!r}; have {self.names}") from None
        return tuple(sorted(set(idx)))

    def marginal(self, group: Sequence[str]) -> "JointPmf":
        """Marginal over ``group``, axes kept in this joint's order."""
        keep = self.axes(group)
        drop = tuple(i for i in range(len(self.names)) if i not in keep)
        table = self.table.sum(axis=drop) if drop else self.table
        return JointPmf(tuple(self.names[i] for i in keep), table)


def _as_group(g) -> tuple:
    if isinstance(g, str):
        return (g,)
    return tuple(g)


def entropy(j: JointPmf, group) -> float:
    group = _as_group(group)
    if not group:
        raise ValueError("entropy of an empty group")
    keep = j.axes(group)
    drop = tuple(i for i in range(len(j.names)) if i not in keep)
    marg = j.table.sum(axis=drop) if drop else j.table
    return max(entropy_of_probs(marg), 0.0)


def cond_mutual_information(j: JointPmf, a, b, c=(), clamp: bool = True) -> float:
    """I(a;b|c) via the four-entropy expansion.

    Values in [-1e-12, 0) are rounding noise and clamp to 0 unless
    ``clamp`` is false.
    """
    a, b, c = _as_group(a), _as_group(b), _as_group(c)
    if not a or not b:
        raise ValueError("mutual information needs nonempty groups")
    sa, sb, sc = set(a), set(b), set(c)
    if sa & sb or sa & sc or sb & sc:
        raise ValueError(f"groups overlap: {a}, {b}, {c}")

    def h(g):
        return entropy(j, g) if g else 0.0

    val = h(a + c) + h(b + c) - h(a + b + c) - h(c)
    if val < 0.0 and clamp:
        if val < -MASS_TOL:
            raise ArithmeticError(f"negative mutual information {val}")
        val = 0.0
    return val
