"""Binary example: additive binary MAC with a state known at both encoders.

Encoder 1 sees S noncausally; Encoder 2 sees it strictly causally and can
forward it to the receiver.  The capacity is that of a binary channel with
state known at both ends, which strictly beats the binary dirty-paper rate.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .infocore import DomainError, JointPmf, binary_convolution, binary_entropy, cond_mutual_information

h = binary_entropy


@dataclass(frozen=True)
class BinaryParams:
    p: float
    q1: float
    q2: float = 0.5

    def __post_init__(self):
        _check(self.p, self.q1)
        if self.q2 < 0.5:
            warnings.warn(
                f"q2={self.q2} < 1/2: the closed forms assume X2 ~ Bern(1/2) is admissible",
                stacklevel=2,
            )


def _check(p, q1):
    if not (0.0 <= p <= 0.5):
        raise DomainError(f"p={p} outside [0, 1/2]")
    if not (0.0 <= q1 <= 0.5):
        raise DomainError(f"q1={q1} outside [0, 1/2]")


def cb_capacity(p: float, q1: float) -> float:
    """h(p * q1) - h(p)."""
    _check(p, q1)
    return h(binary_convolution(p, q1)) - h(p)


def pstar(p: float) -> float:
    if not (0.0 <= p <= 0.5):
        raise DomainError(f"p={p} outside [0, 1/2]")
    return 1.0 - 2.0 ** (-h(p))


def _g(q: float, p: float) -> float:
    return h(q) - h(p) if q >= p else 0.0


def gp_rate(p: float, q1: float) -> float:
    """Binary dirty-paper capacity with input weight q1 (state unknown at the receiver)."""
    _check(p, q1)
    ps = pstar(p)
    if q1 >= ps:
        return _g(q1, p)
    return q1 * math.log2((1.0 - ps) / ps)


def gap(p: float, q1: float) -> float:
    return cb_capacity(p, q1) - gp_rate(p, q1)


def _per_state_information(p: float, weights: np.ndarray) -> np.ndarray:
    """I(X1;Y1 | S=s) for X1 ~ Bern(w) through Y1 = X1 xor s xor Z1, one value per w."""
    out = np.empty(weights.size)
    for i, w in enumerate(weights):
        # joint over (X1, Y1) given S = 0; S = 1 only relabels Y1
        t = np.array([[(1 - w) * (1 - p), (1 - w) * p], [w * p, w * (1 - p)]])
        out[i] = cond_mutual_information(JointPmf(("X1", "Y1"), t), "X1", "Y1")
    return out


def brute_force_cb(p: float, q1: float, levels: int = 201) -> float:
    """Grid maximum of I(X1;Y1|S) over P(X1=1|S=s) with average weight <= q1."""
    if levels < 2:
        raise ValueError("levels must be >= 2")
    w = np.linspace(0.0, 1.0, levels)
    info = _per_state_information(p, w)
    total = 0.5 * info[:, None] + 0.5 * info[None, :]
    ok = 0.5 * w[:, None] + 0.5 * w[None, :] <= q1 + 1e-12
    return float(np.max(np.where(ok, total, -np.inf)))


def sweep_grid(step: float = 0.05, lo: float = 0.05, hi: float = 0.45) -> np.ndarray:
    n = int(round((hi - lo) / step)) + 1
    return np.round(lo + step * np.arange(n), 12)
