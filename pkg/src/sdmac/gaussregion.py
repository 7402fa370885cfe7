"""Gaussian MAC with additive state: Y = X1 + X2 + S + Z.

The capacity region is a union over correlation pairs (rho12, rho1s) of
pentagons with closed-form corners.  The union's convex hull is traced by
support functions: a uniform grid over the feasible quarter disc, then a
step-halving pattern search from the best grid point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .auxsearch import Direction, default_directions, pentagon_support
from .dmregion import RateBounds
from .geom2d import NEG_INF, RatePolygon, from_supports

DISC_TOL = 1e-12
REFINE_STEP0 = 0.1
REFINE_HALVINGS = 20


@dataclass(frozen=True)
class GaussianParams:
    p1: float
    p2: float
    q: float
    n: float

    def __post_init__(self):
        if min(self.p1, self.p2, self.q) < 0 or not self.n > 0:
            raise ValueError(f"need P1, P2, Q >= 0 and N > 0, got {self}")

    def scaled(self, lam: float) -> "GaussianParams":
        return GaussianParams(lam * self.p1, lam * self.p2, lam * self.q, lam * self.n)


@dataclass(frozen=True)
class CorrPair:
    rho12: float
    rho1s: float

    def __post_init__(self):
        if not (0.0 <= self.rho12 <= 1.0 and -1.0 <= self.rho1s <= 0.0):
            raise ValueError(f"correlations out of range: {self}")
        if self.rho12**2 + self.rho1s**2 > 1.0 + DISC_TOL:
            raise ValueError(f"rho12^2 + rho1s^2 > 1: {self}")


def _feasible(r12, r1s):
    return (r12 >= 0) & (r12 <= 1) & (r1s >= -1) & (r1s <= 0) & (r12**2 + r1s**2 <= 1 + DISC_TOL)


def _ab(gp: GaussianParams, r12, r1s):
    r12 = np.asarray(r12, dtype=float)
    r1s = np.asarray(r1s, dtype=float)
    resid = gp.p1 * np.maximum(1.0 - r12**2 - r1s**2, 0.0)
    a = 0.5 * np.log2(1.0 + resid / gp.n)
    coherent = (math.sqrt(gp.p2) + r12 * math.sqrt(gp.p1)) ** 2
    interference = resid + (math.sqrt(gp.q) + r1s * math.sqrt(gp.p1)) ** 2 + gp.n
    b = 0.5 * np.log2(1.0 + coherent / interference) + a
    return a, b


def gauss_bounds(gp: GaussianParams, c: CorrPair) -> RateBounds:
    a, b = _ab(gp, c.rho12, c.rho1s)
    return RateBounds(float(a), float(b))


def _grid(steps: int):
    if steps < 2:
        raise ValueError("grid_steps must be >= 2")
    r12, r1s = np.meshgrid(np.linspace(0.0, 1.0, steps), np.linspace(-1.0, 0.0, steps), indexing="ij")
    r12, r1s = r12.ravel(), r1s.ravel()
    keep = _feasible(r12, r1s)
    return r12[keep], r1s[keep]


def _project(r12, r1s):
    """Nearest feasible pair: clip to the box, then pull radially onto the disc."""
    r12, r1s = min(max(r12, 0.0), 1.0), min(max(r1s, -1.0), 0.0)
    r = math.hypot(r12, r1s)
    if r > 1.0:
        r12, r1s = r12 / r, r1s / r
    return r12, r1s


_MOVES = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1))


def _pattern_search(f, x, fx):
    """Maximize f from x by projected compass moves, halving the step 20 times from 0.1.

    Projection lets the search slide along the disc boundary, where the
    sum-rate optimum often sits.
    """
    step = REFINE_STEP0
    for _ in range(REFINE_HALVINGS + 1):
        while True:
            cand = {_project(x[0] + dx * step, x[1] + dy * step) for dx, dy in _MOVES}
            cand = sorted(c for c in cand if c != x)
            if not cand:
                break
            vals = [f(*c) for c in cand]
            i = int(np.argmax(vals))
            if vals[i] > fx:
                x, fx = cand[i], vals[i]
            else:
                break
        step /= 2
    return x, fx


@dataclass(frozen=True)
class GaussSupport:
    direction: Direction
    value: float
    corr: CorrPair
    a: float
    b: float
    point: tuple


def _maximize(objective, grid_steps: int, refine: bool):
    r12, r1s = _grid(grid_steps)
    vals = objective(r12, r1s)
    i = int(np.argmax(vals))
    x, fx = (float(r12[i]), float(r1s[i])), float(vals[i])
    if refine:
        x, fx = _pattern_search(lambda u, v: float(objective(u, v)), x, fx)
    return x, fx


def gauss_supports(gp: GaussianParams, grid_steps: int = 101, directions: Optional[Sequence] = None,
                   refine: bool = True) -> list:
    directions = default_directions() if directions is None else directions
    out = []
    for d in directions:
        d = d if isinstance(d, Direction) else Direction(*d)

        def objective(r12, r1s, d=d):
            a, b = _ab(gp, r12, r1s)
            return pentagon_support(a, b, d.wc, d.w1)[0]

        x, fx = _maximize(objective, grid_steps, refine)
        a, b = _ab(gp, *x)
        _, rc, r1 = pentagon_support(a, b, d.wc, d.w1)
        out.append(GaussSupport(d, fx, CorrPair(max(x[0], 0.0), min(x[1], 0.0)), float(a), float(b),
                                (float(rc), float(r1))))
    return out


def gauss_region(gp: GaussianParams, grid_steps: int = 101, directions: Optional[Sequence] = None,
                 refine: bool = True) -> RatePolygon:
    res = gauss_supports(gp, grid_steps, directions, refine)
    if any(r.value == NEG_INF for r in res):
        return RatePolygon()
    return from_supports([tuple(r.direction) for r in res], [r.value for r in res])


def gauss_cm_capacity(gp: GaussianParams, grid_steps: int = 101, refine: bool = True) -> float:
    """Largest sum-rate bound over feasible correlation pairs."""
    return _cm_argmax(gp, grid_steps, refine)[1]


def _cm_argmax(gp, grid_steps, refine):
    return _maximize(lambda r12, r1s: _ab(gp, r12, r1s)[1], grid_steps, refine)
