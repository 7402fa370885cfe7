"""Search over auxiliary distributions and support-function tracing.

The inner region is convex, so it is described by its support function
h(w) = max over achievable (Rc, R1) of wc*Rc + w1*R1.  For a fixed
distribution the achievable set is a pentagon whose support has a closed
form; the search maximizes that closed form over a deterministic candidate
stream:

1. structured seeds on a simplex grid (V constant or a copy of S, U
   constant or a copy of X1, P_X2 and P_{X1|S,X2} on the grid),
2. random restarts, one counter-keyed generator per restart index,
3. coordinate ascent from a few fixed starts, one run per direction.

Every accepted ascent iterate joins the stream, so filtering the stream
(input constraints, the nonnegativity constraint of the equivalent
characterization) can only lower a support value.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from itertools import product
from typing import Optional, Sequence

import numpy as np

from . import dmregion
from .geom2d import NEG_INF, RatePolygon, from_supports
from .macmodel import AuxJoint, CommonMsgAux, DmMacChannel, InputDist, prop1_caps

MAX_GRID_COUNT = 10**8
MAX_SEEDS = 200_000
CONSTRAINT_TOL = 1e-12
COROLLARY_TOL = 1e-9
ASCENT_STEP0 = 0.25
ASCENT_HALVINGS = 5
IMPROVE_EPS = 1e-13
CHUNK_ENTRIES = 1 << 22


@dataclass(frozen=True)
class SearchConfig:
    levels: int = 4
    restarts: int = 64
    seed: int = 0
    max_iters: int = 4  # sweeps per ascent step size; 0 disables ascent
    caps: Optional[tuple] = None  # (|U|, |V|); None picks small defaults
    ascent_restarts: int = 2
    allow_large_caps: bool = False

    def __post_init__(self):
        if self.levels < 2:
            raise ValueError("levels must be >= 2")
        if self.restarts < 0 or self.max_iters < 0 or self.ascent_restarts < 0:
            raise ValueError("restarts, max_iters and ascent_restarts must be >= 0")


@dataclass(frozen=True)
class Direction:
    wc: float
    w1: float

    def __post_init__(self):
        wc, w1 = float(self.wc), float(self.w1)
        if wc < 0 or w1 < 0 or wc + w1 == 0:
            raise ValueError(f"invalid direction ({wc}, {w1})")
        object.__setattr__(self, "wc", wc / (wc + w1))
        object.__setattr__(self, "w1", w1 / (wc + w1))

    def __iter__(self):
        return iter((self.wc, self.w1))


def default_directions(n: int = 33) -> list:
    return [Direction(i / (n - 1), 1 - i / (n - 1)) for i in range(n)]


def resolve_caps(ch: DmMacChannel, cfg: SearchConfig, constrained: bool = False) -> tuple:
    """(|U|, |V|) for a search; checked against the sufficiency caps."""
    u_lim, v_lim = prop1_caps(ch, corollary=constrained)
    if cfg.caps is None:
        nu, nv = ch.n_x1 * ch.n_s, ch.n_s + 1
        if constrained:
            nv += 1
    else:
        nu, nv = (int(c) for c in cfg.caps)
    if nu < 1 or nv < 1:
        raise ValueError("caps must be positive")
    if not cfg.allow_large_caps and (nu > u_lim or nv > v_lim):
        raise ValueError(f"caps ({nu}, {nv}) exceed the sufficient bounds ({u_lim}, {v_lim})")
    return nu, nv


# ------------------------------------------------------------------ grids


def simplex_grid(dim: int, levels: int) -> np.ndarray:
    """All compositions of ``levels`` units into ``dim`` bins, divided by ``levels``.

    Rows come in lexicographic order of the integer composition vectors.
    """
    if dim < 1 or levels < 1:
        raise ValueError("dim and levels must be >= 1")
    count = math.comb(levels + dim - 1, dim - 1)
    if count > MAX_GRID_COUNT:
        raise ValueError(f"simplex grid has {count} points (limit {MAX_GRID_COUNT})")
    out = np.empty((count, dim))
    row = 0
    comp = [0] * dim

    def rec(i, left):
        nonlocal row
        if i == dim - 1:
            comp[i] = left
            out[row] = comp
            row += 1
            return
        for k in range(left + 1):
            comp[i] = k
            rec(i + 1, left - k)

    rec(0, levels)
    return out / levels


def pentagon_support(a, b, wc: float, w1: float):
    """Closed-form support of {R1 <= a, Rc + R1 <= b, R >= 0} and a maximizing vertex.

    Vectorized over ``a`` and ``b``; empty pentagons give -inf.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    empty = (a < 0) | (b < 0)
    ap, bp = np.maximum(a, 0.0), np.maximum(b, 0.0)
    if wc >= w1:
        val = wc * bp
        rc, r1 = bp, np.zeros_like(bp)
    else:
        m = np.minimum(ap, bp)
        val = w1 * m + wc * np.maximum(bp - m, 0.0)
        rc, r1 = bp - m, m
    val = np.where(empty, NEG_INF, val)
    return val, rc, r1


# ------------------------------------------------------------- candidates


@dataclass
class _Batch:
    """Stacked auxiliary distributions (leading axis = candidate index)."""

    px2: np.ndarray
    pv: np.ndarray
    pu: np.ndarray

    def __len__(self):
        return self.px2.shape[0]

    def take(self, i: int) -> AuxJoint:
        return AuxJoint(self.px2[i], self.pv[i], self.pu[i])

    @staticmethod
    def concat(parts):
        parts = [p for p in parts if len(p)]
        return _Batch(*(np.concatenate([getattr(p, f) for p in parts]) for f in ("px2", "pv", "pu")))


def structured_seeds(ch: DmMacChannel, nu: int, nv: int, levels: int, v_patterns=("const", "S")) -> _Batch:
    """Grid over P_X2 and P_{X1|S,X2} combined with copy patterns for U and V."""
    S, X1, X2, _ = ch.sizes
    g2 = simplex_grid(X2, levels)
    g1 = simplex_grid(X1, levels)
    n_rows = S * X2
    n_combo = len(g2) * len(g1) ** n_rows
    patterns = []
    for vp in v_patterns:
        if vp == "S" and nv < S:
            continue
        for up in ("const", "X1"):
            if up == "X1" and nu < X1:
                continue
            patterns.append((vp, up))
    total = n_combo * len(patterns)
    if total > MAX_SEEDS:
        raise ValueError(f"{total} structured seeds at levels={levels}; lower the grid levels")
    px2_l, px1_l = [], []
    for i2, rows in product(range(len(g2)), product(range(len(g1)), repeat=n_rows)):
        px2_l.append(g2[i2])
        px1_l.append(g1[list(rows)].reshape(S, X2, X1))
    px2 = np.array(px2_l)
    px1 = np.array(px1_l)  # (G, S, X2, X1)
    G = px2.shape[0]
    parts = []
    for vp, up in patterns:
        pv = np.zeros((G, S, X2, nv))
        for s in range(S):
            pv[:, s, :, s if vp == "S" else 0] = 1.0
        pu = np.zeros((G, S, nv, X2, nu, X1))
        for x1 in range(X1):
            u = x1 if up == "X1" else 0
            pu[:, :, :, :, u, x1] = px1[:, :, None, :, x1]
        parts.append(_Batch(px2, pv, pu))
    return _Batch.concat(parts)


def restart_rng(seed: int, r: int) -> np.random.Generator:
    """Counter-based generator keyed by (seed, restart index)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, r])))


def random_aux(ch: DmMacChannel, nu: int, nv: int, seed: int, r: int) -> AuxJoint:
    rng = restart_rng(seed, r)
    alpha = 1.0 if r % 2 == 0 else 0.3
    S, X1, X2, _ = ch.sizes
    px2 = rng.dirichlet(np.full(X2, alpha))
    pv = rng.dirichlet(np.full(nv, alpha), size=(S, X2))
    pu = rng.dirichlet(np.full(nu * X1, alpha), size=(S, nv, X2)).reshape(S, nv, X2, nu, X1)
    return AuxJoint(px2, pv, pu)


def _random_batch(ch, nu, nv, seed, indices) -> _Batch:
    auxes = [random_aux(ch, nu, nv, seed, r) for r in indices]
    if not auxes:
        S, X1, X2, _ = ch.sizes
        return _Batch(np.empty((0, X2)), np.empty((0, S, X2, nv)), np.empty((0, S, nv, X2, nu, X1)))
    return _Batch(
        np.array([a.px2 for a in auxes]),
        np.array([a.pv_given_sx2 for a in auxes]),
        np.array([a.pux1_given_svx2 for a in auxes]),
    )


def _input_means(ch: DmMacChannel, batch: _Batch):
    """E[X1], E[X2] per candidate (symbol index as the input value)."""
    px1 = np.einsum("s,nx,nsxv,nsvxuk->nk", ch.prior, batch.px2, batch.pv, batch.pu)
    e1 = px1 @ np.arange(ch.n_x1)
    e2 = batch.px2 @ np.arange(ch.n_x2)
    return e1, e2


def _feasible(ch: DmMacChannel, batch: _Batch) -> np.ndarray:
    ok = np.ones(len(batch), dtype=bool)
    if not ch.constraints:
        return ok
    e1, e2 = _input_means(ch, batch)
    if "X1" in ch.constraints:
        ok &= e1 <= ch.constraints["X1"] + CONSTRAINT_TOL
    if "X2" in ch.constraints:
        ok &= e2 <= ch.constraints["X2"] + CONSTRAINT_TOL
    return ok


@dataclass
class _Evaluated:
    batch: _Batch
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    ok: np.ndarray

    @staticmethod
    def concat(parts):
        parts = [p for p in parts if len(p.batch)]
        return _Evaluated(
            _Batch.concat([p.batch for p in parts]),
            *(np.concatenate([getattr(p, f) for p in parts]) for f in ("a", "b", "c", "ok")),
        )


def evaluate(ch: DmMacChannel, batch: _Batch) -> _Evaluated:
    n = len(batch)
    per = max(1, CHUNK_ENTRIES // max(1, batch.pu[0].size * ch.n_y * 2)) if n else 1
    a, b, c = np.empty(n), np.empty(n), np.empty(n)
    for lo in range(0, n, per):
        sl = slice(lo, lo + per)
        a[sl], b[sl], c[sl] = dmregion.inner_terms_batch(ch, batch.px2[sl], batch.pv[sl], batch.pu[sl])
    return _Evaluated(batch, a, b, c, _feasible(ch, batch))


def candidate_pool(ch: DmMacChannel, cfg: SearchConfig, nu: int, nv: int) -> _Evaluated:
    seeds = structured_seeds(ch, nu, nv, cfg.levels)
    rand = _random_batch(ch, nu, nv, cfg.seed, range(cfg.restarts))
    return evaluate(ch, _Batch.concat([seeds, rand]))


def _objective(ev: _Evaluated, d: Direction, constrained: bool) -> np.ndarray:
    val, _, _ = pentagon_support(ev.a, ev.b, d.wc, d.w1)
    mask = ev.ok & (ev.c >= -COROLLARY_TOL) if constrained else ev.ok
    return np.where(mask, val, NEG_INF)


# ---------------------------------------------------------------- ascent


def _rows(aux_arrays):
    """(array index, row index) for every conditional row, in a fixed order."""
    px2, pv, pu = aux_arrays
    out = [(0, ())]
    out += [(1, idx) for idx in np.ndindex(pv.shape[:-1])]
    out += [(2, idx) for idx in np.ndindex(pu.shape[:3])]
    return out


def _row_moves(row: np.ndarray, step: float) -> np.ndarray:
    moves = []
    d = row.size
    for i in range(d):
        delta = min(step, row[i])
        if delta <= 0:
            continue
        for j in range(d):
            if j == i:
                continue
            new = row.copy()
            new[i] -= delta
            new[j] += delta
            moves.append(new)
    return np.array(moves).reshape(-1, d)


def _ascend(ch, aux: AuxJoint, score, max_iters: int):
    """Coordinate ascent; returns the accepted iterates (including the start)."""
    cur = [aux.px2.copy(), aux.pv_given_sx2.copy(), aux.pux1_given_svx2.copy()]
    start = _Batch(cur[0][None], cur[1][None], cur[2][None])
    cur_val = float(score(evaluate(ch, start))[0])
    trace = [evaluate(ch, start)]
    if max_iters == 0:
        return trace
    rows = _rows(cur)
    step = ASCENT_STEP0
    for _ in range(ASCENT_HALVINGS + 1):
        for _sweep in range(max_iters):
            improved = False
            for which, idx in rows:
                arr = cur[which]
                row = arr[idx].reshape(-1) if which == 2 else arr[idx]
                moves = _row_moves(row, step)
                if not len(moves):
                    continue
                k = len(moves)
                cand = [np.repeat(c[None], k, axis=0) for c in cur]
                if which == 2:
                    cand[2][(slice(None),) + idx] = moves.reshape((k,) + arr.shape[3:])
                else:
                    cand[which][(slice(None),) + idx] = moves
                ev = evaluate(ch, _Batch(*cand))
                vals = score(ev)
                best = int(np.argmax(vals))
                if vals[best] > cur_val + IMPROVE_EPS:
                    cur = [c[best].copy() for c in cand]
                    cur_val = float(vals[best])
                    picked = _Batch(*(c[best : best + 1] for c in cand))
                    trace.append(_Evaluated(picked, ev.a[best : best + 1], ev.b[best : best + 1],
                                            ev.c[best : best + 1], ev.ok[best : best + 1]))
                    improved = True
            if not improved:
                break
        step /= 2
    return trace


def coordinate_ascent(ch: DmMacChannel, aux0: AuxJoint, d: Direction, max_iters: int,
                      return_trace: bool = False):
    """Improve ``aux0`` for the ``d``-scalarized support, one conditional row at a time.

    Each row is moved over a local grid (transfer ``step`` mass between two
    entries), with the step halved from 0.25 five times.  Only strict
    improvements are accepted, so the objective never decreases.
    """
    trace = _ascend(ch, aux0, lambda ev: _objective(ev, d, False), max_iters)
    final = trace[-1].batch.take(0)
    if return_trace:
        return final, [float(_objective(t, d, False)[0]) for t in trace]
    return final


def ascent_starts(ch: DmMacChannel, cfg: SearchConfig, nu: int, nv: int) -> list:
    S, X1, X2, _ = ch.sizes
    starts = [AuxJoint(np.full(X2, 1 / X2), np.full((S, X2, nv), 1 / nv),
                       np.full((S, nv, X2, nu, X1), 1 / (nu * X1)))]
    if nv >= S and nu >= X1:
        pv = np.zeros((S, X2, nv))
        for s in range(S):
            pv[s, :, s] = 1.0
        pu = np.zeros((S, nv, X2, nu, X1))
        for x1 in range(X1):
            pu[:, :, :, x1, x1] = 1.0 / X1
        starts.append(AuxJoint(np.full(X2, 1 / X2), pv, pu))
    starts += [random_aux(ch, nu, nv, cfg.seed, r) for r in range(min(cfg.ascent_restarts, cfg.restarts))]
    return starts


# --------------------------------------------------------------- supports


@dataclass(frozen=True)
class SupportResult:
    direction: Direction
    value: float
    witness: Optional[AuxJoint]
    a: float
    b: float
    point: tuple  # maximizing (Rc, R1) on the witness pentagon
    index: int  # position in the candidate stream


def _direction_stream(ch, cfg, nu, nv, pool, d: Direction) -> _Evaluated:
    parts = [pool]
    if cfg.max_iters > 0:
        for aux in ascent_starts(ch, cfg, nu, nv):
            parts.extend(_ascend(ch, aux, lambda ev: _objective(ev, d, False), cfg.max_iters))
    return _Evaluated.concat(parts)


def _best(stream: _Evaluated, d: Direction, constrained: bool) -> SupportResult:
    vals = _objective(stream, d, constrained)
    i = int(np.argmax(vals))
    if vals[i] == NEG_INF:
        return SupportResult(d, NEG_INF, None, math.nan, math.nan, (math.nan, math.nan), -1)
    a, b = float(stream.a[i]), float(stream.b[i])
    _, rc, r1 = pentagon_support(a, b, d.wc, d.w1)
    return SupportResult(d, float(vals[i]), stream.batch.take(i), a, b, (float(rc), float(r1)), i)


def _support_job(args):
    ch, cfg, nu, nv, pool, d, modes = args
    stream = _direction_stream(ch, cfg, nu, nv, pool, d)
    return [_best(stream, d, m) for m in modes]


def trace_supports(ch: DmMacChannel, cfg: SearchConfig, directions: Sequence[Direction],
                   constrained: bool = False, jobs: int = 1, both: bool = False):
    """Support results per direction.

    With ``both`` the return value is a pair (unconstrained, constrained)
    computed from one candidate stream, so the second never exceeds the
    first.  Both then use the constrained caps (one more V symbol).
    """
    directions = [d if isinstance(d, Direction) else Direction(*d) for d in directions]
    nu, nv = resolve_caps(ch, cfg, constrained or both)
    pool = candidate_pool(ch, cfg, nu, nv)
    modes = (False, True) if both else (constrained,)
    jobs_args = [(ch, cfg, nu, nv, pool, d, modes) for d in directions]
    if jobs > 1 and len(directions) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_support_job, jobs_args))
    else:
        results = [_support_job(a) for a in jobs_args]
    if both:
        return [r[0] for r in results], [r[1] for r in results]
    return [r[0] for r in results]


def support_value(ch: DmMacChannel, cfg: SearchConfig, d, constrained: bool = False):
    """(support value, witness AuxJoint) in direction ``d``."""
    res = trace_supports(ch, cfg, [d], constrained=constrained)[0]
    return res.value, res.witness


def region_from_results(results: Sequence[SupportResult]) -> RatePolygon:
    if any(r.value == NEG_INF for r in results):
        return RatePolygon()
    return from_supports([tuple(r.direction) for r in results], [r.value for r in results])


def trace_region(ch: DmMacChannel, cfg: SearchConfig, directions=None, constrained: bool = False,
                 jobs: int = 1) -> RatePolygon:
    """Polygon cut out by the traced supporting halfplanes."""
    directions = default_directions() if directions is None else directions
    if len(directions) < 3:
        raise ValueError("need at least 3 directions")
    return region_from_results(trace_supports(ch, cfg, directions, constrained, jobs))


# ------------------------------------------------------- common message


def cm_capacity_search(ch: DmMacChannel, cfg: SearchConfig, k_cap: Optional[int] = None):
    """max over sampled P_{K,X1|S,X2} of I(K,X2;Y) - I(K,X2;S); returns (value, witness)."""
    S, X1, X2, _ = ch.sizes
    nk = S * X1 * X2 + 1 if k_cap is None else int(k_cap)
    seeds = structured_seeds(ch, nk, 1, cfg.levels, v_patterns=("const",))
    rand = []
    for r in range(cfg.restarts):
        rng = restart_rng(cfg.seed, r)
        alpha = 1.0 if r % 2 == 0 else 0.3
        px2 = rng.dirichlet(np.full(X2, alpha))
        pk = rng.dirichlet(np.full(nk * X1, alpha), size=(S, X2)).reshape(S, 1, X2, nk, X1)
        rand.append((px2, np.ones((S, X2, 1)), pk))
    parts = [evaluate(ch, seeds)]
    if rand:
        parts.append(evaluate(ch, _Batch(*(np.array(z) for z in zip(*rand)))))

    def score(ev):
        return np.where(ev.ok, ev.b, NEG_INF)

    if cfg.max_iters > 0:
        starts = [AuxJoint(np.full(X2, 1 / X2), np.ones((S, X2, 1)), np.full((S, 1, X2, nk, X1), 1 / (nk * X1)))]
        starts += [AuxJoint(*z) for z in rand[: cfg.ascent_restarts]]
        for aux in starts:
            parts.extend(_ascend(ch, aux, score, cfg.max_iters))
    stream = _Evaluated.concat(parts)
    vals = score(stream)
    i = int(np.argmax(vals))
    aux = stream.batch.take(i)
    witness = CommonMsgAux(aux.px2, aux.pux1_given_svx2[:, 0])
    return float(vals[i]), witness


# ----------------------------------------------------------- outer bound


def input_grid(ch: DmMacChannel, levels: int) -> tuple:
    S, X1, X2, _ = ch.sizes
    g2 = simplex_grid(X2, levels)
    g1 = simplex_grid(X1, levels)
    n_rows = X2 * S
    count = len(g2) * len(g1) ** n_rows
    if count > MAX_SEEDS:
        raise ValueError(f"{count} grid input distributions at levels={levels}; lower the grid levels")
    px2, px1 = [], []
    for i2, rows in product(range(len(g2)), product(range(len(g1)), repeat=n_rows)):
        px2.append(g2[i2])
        px1.append(g1[list(rows)].reshape(X2, S, X1))
    return np.array(px2), np.array(px1)


def outer_supports(ch: DmMacChannel, cfg: SearchConfig, directions: Sequence[Direction]):
    """Sampled maximization of the alternative outer bound per direction.

    Only per-distribution dominance is certified; the maximum over a finite
    sample can fall short of the true outer boundary.
    """
    directions = [d if isinstance(d, Direction) else Direction(*d) for d in directions]
    S, X1, X2, _ = ch.sizes
    px2, px1 = input_grid(ch, cfg.levels)
    rp2, rp1 = [], []
    for r in range(cfg.restarts):
        rng = restart_rng(cfg.seed, r)
        alpha = 1.0 if r % 2 == 0 else 0.3
        rp2.append(rng.dirichlet(np.full(X2, alpha)))
        rp1.append(rng.dirichlet(np.full(X1, alpha), size=(X2, S)))
    if rp2:
        px2 = np.concatenate([px2, np.array(rp2)])
        px1 = np.concatenate([px1, np.array(rp1)])
    a, b = dmregion.outer_terms_batch(ch, px2, px1)
    ok = np.ones(len(a), dtype=bool)
    if "X1" in ch.constraints:
        px1m = np.einsum("s,nx,nxsk->nk", ch.prior, px2, px1)
        ok &= px1m @ np.arange(X1) <= ch.constraints["X1"] + CONSTRAINT_TOL
    if "X2" in ch.constraints:
        ok &= px2 @ np.arange(X2) <= ch.constraints["X2"] + CONSTRAINT_TOL
    out = []
    for d in directions:
        val, rc, r1 = pentagon_support(a, b, d.wc, d.w1)
        val = np.where(ok, val, NEG_INF)
        i = int(np.argmax(val))
        if val[i] == NEG_INF:
            out.append(SupportResult(d, NEG_INF, None, math.nan, math.nan, (math.nan, math.nan), -1))
            continue
        out.append(SupportResult(d, float(val[i]), InputDist(px2[i], px1[i]), float(a[i]), float(b[i]),
                                 (float(rc[i]), float(r1[i])), i))
    return out


def with_caps(cfg: SearchConfig, nu: int, nv: int) -> SearchConfig:
    return replace(cfg, caps=(nu, nv))
