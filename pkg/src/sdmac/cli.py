"""Command-line front end: ``sdmac <command> ...``.

Every command writes ``# key=value`` manifest lines and then CSV (or the
system text for ``fme``).  Numbers are printed with 6 decimals.  The
wall-clock duration goes to stderr so reruns stay byte-identical.
"""

from __future__ import annotations

import argparse
import sys
import time
from contextlib import contextmanager

import numpy as np

from . import __version__
from .auxsearch import (
    SearchConfig,
    cm_capacity_search,
    default_directions,
    outer_supports,
    region_from_results,
    resolve_caps,
    trace_supports,
    with_caps,
)
from .binexample import brute_force_cb, cb_capacity, gap, gp_rate, sweep_grid
from .fme import parse_system, reduce_system, render_system
from .gaussregion import GaussianParams, gauss_cm_capacity, gauss_supports
from .geom2d import NEG_INF, RatePolygon, from_supports
from .macmodel import load_channel


def fmt(x: float) -> str:
    if x == NEG_INF:
        return "-inf"
    if x != x:
        return "nan"
    s = f"{x:.6f}"
    return "0.000000" if s == "-0.000000" else s


def manifest(command: str, params: dict) -> list:
    lines = [f"# command={command}", f"# version={__version__}"]
    lines += [f"# {k}={v}" for k, v in params.items()]
    return lines


def support_block(results) -> list:
    lines = ["wc,w1,support,Rc,R1"]
    for r in results:
        lines.append(",".join(fmt(v) for v in (r.direction.wc, r.direction.w1, r.value, *r.point)))
    return lines


def vertex_block(poly: RatePolygon) -> list:
    lines = ["vertex,Rc,R1"]
    lines += [f"{i},{fmt(x)},{fmt(y)}" for i, (x, y) in enumerate(poly.vertices)]
    return lines


def _search_config(args, ch) -> SearchConfig:
    cfg = SearchConfig(levels=args.levels, restarts=args.restarts, seed=args.seed)
    if args.umax is None and args.vmax is None and not args.no_v:
        return cfg
    du, dv = resolve_caps(ch, cfg, args.constrained)
    nu = du if args.umax is None else args.umax
    nv = 1 if args.no_v else (dv if args.vmax is None else args.vmax)
    return with_caps(cfg, nu, nv)


def cmd_dm_region(args) -> list:
    ch = load_channel(args.channel)
    cfg = _search_config(args, ch)
    res = trace_supports(ch, cfg, default_directions(args.directions), constrained=args.constrained,
                         jobs=args.jobs)
    nu, nv = resolve_caps(ch, cfg, args.constrained)
    head = manifest("dm_region", {
        "channel": args.channel, "region": "Cprime" if nv == 1 else "C",
        "constrained": int(args.constrained), "levels": cfg.levels, "restarts": cfg.restarts,
        "seed": cfg.seed, "umax": nu, "vmax": nv, "directions": args.directions,
    })
    return head + support_block(res) + [""] + vertex_block(region_from_results(res))


def cmd_dm_outer(args) -> list:
    ch = load_channel(args.channel)
    cfg = SearchConfig(levels=args.levels, restarts=args.restarts, seed=args.seed)
    res = outer_supports(ch, cfg, default_directions(args.directions))
    head = manifest("dm_outer", {
        "channel": args.channel, "levels": cfg.levels, "restarts": cfg.restarts, "seed": cfg.seed,
        "directions": args.directions,
        "certified": "per-distribution dominance only; sampled maximum may fall short of the outer boundary",
    })
    return head + support_block(res) + [""] + vertex_block(region_from_results(res))


def cmd_cm_capacity(args) -> list:
    ch = load_channel(args.channel)
    cfg = SearchConfig(levels=args.levels, restarts=args.restarts, seed=args.seed)
    value, w = cm_capacity_search(ch, cfg, k_cap=args.kmax)
    head = manifest("cm_capacity", {
        "channel": args.channel, "levels": cfg.levels, "restarts": cfg.restarts, "seed": cfg.seed,
        "kmax": w.n_k,
    })
    lines = head + ["cm_capacity", fmt(value), "", "x2,prob"]
    lines += [f"{x2},{fmt(p)}" for x2, p in enumerate(w.px2)]
    lines += ["", "s,x2,k,x1,prob"]
    for (s, x2, k, x1), p in np.ndenumerate(w.pkx1_given_sx2):
        lines.append(f"{s},{x2},{k},{x1},{fmt(p)}")
    return lines


def cmd_binary_example(args) -> list:
    if args.sweep:
        grid = sweep_grid()
        pairs = [(float(p), float(q)) for p in grid for q in grid]
    else:
        if args.p is None or args.q1 is None:
            raise ValueError("give p and q1, or --sweep")
        pairs = [(args.p, args.q1)]
    head = manifest("binary_example", {"sweep": int(args.sweep), "grid": args.grid})
    lines = head + ["p,q1,CB,RGP,gap,CB_bruteforce"]
    for p, q1 in pairs:
        vals = (p, q1, cb_capacity(p, q1), gp_rate(p, q1), gap(p, q1), brute_force_cb(p, q1, args.grid))
        lines.append(",".join(fmt(v) for v in vals))
    return lines


def cmd_gaussian(args) -> list:
    gp = GaussianParams(args.p1, args.p2, args.q, args.n)
    res = gauss_supports(gp, args.grid, default_directions(args.directions))
    if any(r.value == NEG_INF for r in res):
        poly = RatePolygon()
    else:
        poly = from_supports([tuple(r.direction) for r in res], [r.value for r in res])
    cg = gauss_cm_capacity(gp, args.grid)
    head = manifest("gaussian", {
        "P1": args.p1, "P2": args.p2, "Q": args.q, "N": args.n, "grid": args.grid,
        "directions": args.directions,
    })
    lines = head + ["wc,w1,support,Rc,R1,rho12,rho1s"]
    for r in res:
        vals = (r.direction.wc, r.direction.w1, r.value, *r.point, r.corr.rho12, r.corr.rho1s)
        lines.append(",".join(fmt(v) for v in vals))
    return lines + [""] + vertex_block(poly) + ["", "C_G", fmt(cg)]


def cmd_fme(args) -> list:
    with open(args.system, encoding="utf-8") as fh:
        sys_in = parse_system(fh.read())
    out = reduce_system(sys_in)
    head = manifest("fme", {
        "system": args.system, "eliminated": " ".join(v for v in sys_in.rates if v not in out.rates),
        "note": "strict inequalities are read as non-strict",
    })
    return head + render_system(out).splitlines()


def _add_search_flags(p, with_caps=True):
    p.add_argument("--levels", type=int, default=4, help="simplex grid resolution")
    p.add_argument("--restarts", type=int, default=64, help="random restarts")
    p.add_argument("--seed", type=int, default=0)
    if with_caps:
        p.add_argument("--umax", type=int, default=None, help="|U| cap")
        p.add_argument("--vmax", type=int, default=None, help="|V| cap")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sdmac", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dm_region", help="trace the inner region of a channel file")
    p.add_argument("channel")
    _add_search_flags(p)
    p.add_argument("--no_v", action="store_true", help="|V| = 1: encoder 2 ignores the state")
    p.add_argument("--constrained", action="store_true",
                   help="keep only aux with I(V,X2;Y) - I(V,X2;S) >= -1e-9")
    p.add_argument("--directions", type=int, default=33)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_dm_region)

    p = sub.add_parser("dm_outer", help="sampled outer bound of a channel file")
    p.add_argument("channel")
    _add_search_flags(p, with_caps=False)
    p.add_argument("--directions", type=int, default=33)
    p.set_defaults(func=cmd_dm_outer)

    p = sub.add_parser("cm_capacity", help="common-message capacity of a channel file")
    p.add_argument("channel")
    _add_search_flags(p, with_caps=False)
    p.add_argument("--kmax", type=int, default=None, help="|K| cap")
    p.set_defaults(func=cmd_cm_capacity)

    p = sub.add_parser("binary_example", help="closed forms of the binary example")
    p.add_argument("p", type=float, nargs="?")
    p.add_argument("q1", type=float, nargs="?")
    p.add_argument("--sweep", action="store_true", help="p, q1 over 0.05..0.45")
    p.add_argument("--grid", type=int, default=201, help="brute-force grid levels")
    p.set_defaults(func=cmd_binary_example)

    p = sub.add_parser("gaussian", help="Gaussian region and common-message capacity")
    for name in ("p1", "p2", "q", "n"):
        p.add_argument(name, type=float)
    p.add_argument("--grid", type=int, default=101, help="correlation grid steps per axis")
    p.add_argument("--directions", type=int, default=33)
    p.set_defaults(func=cmd_gaussian)

    p = sub.add_parser("fme", help="Fourier-Motzkin reduction of a system file")
    p.add_argument("system")
    p.set_defaults(func=cmd_fme)

    for p in sub.choices.values():
        p.add_argument("--out", default=None, help="output file (default stdout)")
    return ap


@contextmanager
def _sink(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        lines = args.func(args)
        with _sink(args.out) as fh:
            fh.write("\n".join(lines) + "\n")
    except (OSError, ValueError, ArithmeticError) as e:
        print(f"sdmac {args.command}: error: {e}", file=sys.stderr)
        return 1
    print(f"# duration_s={time.perf_counter() - t0:.3f}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
