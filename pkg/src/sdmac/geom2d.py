"""Planar convex geometry for two-user rate regions in the (Rc, R1) plane."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

DEFAULT_TOL = 1e-9
NEG_INF = float("-inf")


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


@dataclass(frozen=True)
class RatePolygon:
    """Counterclockwise vertex list; empty, a point, a segment or a polygon."""

    vertices: tuple = ()

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        for x, y in verts:
            if x < -1e-12 or y < -1e-12:
                raise ValueError(f"vertex ({x}, {y}) outside the nonnegative quadrant")
        n = len(verts)
        for i in range(n):
            p, q = verts[i], verts[(i + 1) % n]
            if n > 1 and math.dist(p, q) <= 1e-12:
                raise ValueError("duplicate consecutive vertices")
            if n > 2 and _cross(p, q, verts[(i + 2) % n]) < -1e-12:
                raise ValueError("vertices are not convex counterclockwise")
        object.__setattr__(self, "vertices", verts)

    @property
    def is_empty(self):
        return not self.vertices

    def __len__(self):
        return len(self.vertices)


def pentagon(rb) -> RatePolygon:
    """{(Rc, R1) >= 0 : R1 <= a, Rc + R1 <= b}."""
    a, b = (float(v) for v in rb)
    if a < 0 or b < 0:
        return RatePolygon()
    m = min(a, b)
    return hull([(0.0, 0.0), (b, 0.0), (b - m, m), (0.0, m)])


def hull(points: Iterable[Sequence[float]]) -> RatePolygon:
    """Convex hull by monotone chain, counterclockwise from the lexicographic minimum."""
    pts = sorted({(float(p[0]), float(p[1])) for p in points})
    if len(pts) <= 1:
        return RatePolygon(tuple(pts))
    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    ring = lower[:-1] + upper[:-1]
    # drop near-duplicates that survive exact-arithmetic dedup
    out = []
    for p in ring:
        if not out or math.dist(out[-1], p) > 1e-12:
            out.append(p)
    if len(out) > 1 and math.dist(out[0], out[-1]) <= 1e-12:
        out.pop()
    return RatePolygon(tuple(out))


def support(poly: RatePolygon, d: Sequence[float]) -> float:
    if poly.is_empty:
        return NEG_INF
    return max(d[0] * x + d[1] * y for x, y in poly.vertices)


def _seg_dist(p, a, b):
    ab = (b[0] - a[0], b[1] - a[1])
    L2 = ab[0] ** 2 + ab[1] ** 2
    t = 0.0 if L2 == 0 else max(0.0, min(1.0, ((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / L2))
    return math.dist(p, (a[0] + t * ab[0], a[1] + t * ab[1]))


def includes(outer: RatePolygon, inner: RatePolygon, tol: float = DEFAULT_TOL) -> bool:
    """True if every vertex of ``inner`` lies in ``outer`` up to distance ``tol``."""
    if inner.is_empty:
        return True
    if outer.is_empty:
        return False
    vs = outer.vertices
    if len(vs) == 1:
        return all(math.dist(v, vs[0]) <= tol for v in inner.vertices)
    if len(vs) == 2:
        return all(_seg_dist(v, vs[0], vs[1]) <= tol for v in inner.vertices)
    for i, p in enumerate(vs):
        q = vs[(i + 1) % len(vs)]
        edge = math.dist(p, q)
        for v in inner.vertices:
            if _cross(p, q, v) / edge < -tol:
                return False
    return True


def from_supports(directions: Sequence[Sequence[float]], values: Sequence[float]) -> RatePolygon:
    """Intersection of {w . R <= h} over all (w, h) with the nonnegative quadrant.

    Weights must be nonnegative; some direction has to weight each axis so
    the intersection is bounded.
    """
    if len(directions) != len(values):
        raise ValueError("one support value per direction")
    if any(h < 0 for h in values):
        return RatePolygon()
    xmax = min((h / w[0] for w, h in zip(directions, values) if w[0] > 0), default=None)
    ymax = min((h / w[1] for w, h in zip(directions, values) if w[1] > 0), default=None)
    if xmax is None or ymax is None:
        raise ValueError("directions do not bound both rates")
    poly = [(0.0, 0.0), (xmax, 0.0), (xmax, ymax), (0.0, ymax)]
    for w, h in zip(directions, values):
        poly = _clip(poly, w, h)
        if not poly:
            return RatePolygon()
    return hull((max(x, 0.0), max(y, 0.0)) for x, y in poly)


def _clip(poly, w, h):
    """Sutherland-Hodgman step against w . x <= h."""
    out = []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        fp = w[0] * p[0] + w[1] * p[1] - h
        fq = w[0] * q[0] + w[1] * q[1] - h
        if fp <= 0:
            out.append(p)
        if (fp < 0 < fq) or (fq < 0 < fp):
            t = fp / (fp - fq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return out
