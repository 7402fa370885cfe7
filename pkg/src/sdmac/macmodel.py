"""Finite-alphabet state-dependent MAC, auxiliary distributions, file I/O.

Kernel layout is ``W[x1, x2, s, y]`` (the order rows appear in a channel
file).  The auxiliary distribution of the inner region factorizes as
``Q_S(s) P_X2(x2) P_{V|S,X2}(v|s,x2) P_{U,X1|S,V,X2}(u,x1|s,v,x2)`` and is
stored as three arrays whose last axis is the conditioned-on variable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .infocore import MASS_TOL, JointPmf, Pmf

PARSE_ROW_TOL = 1e-9
JOINT_NAMES = ("S", "U", "V", "X1", "X2", "Y")


class ChannelFormatError(ValueError):
    """Malformed or inconsistent channel file."""

    def __init__(self, msg, line=None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


def _stochastic(name: str, arr, shape=None, tol=MASS_TOL) -> np.ndarray:
    a = np.array(arr, dtype=float)
    if shape is not None and a.shape != tuple(shape):
        raise ValueError(f"{name} has shape {a.shape}, expected {tuple(shape)}")
    if np.any(a < 0):
        raise ValueError(f"{name} has negative entries")
    err = np.max(np.abs(a.sum(axis=-1) - 1.0))
    if err > tol:
        raise ValueError(f"{name} rows do not sum to 1 (max error {err:.3g})")
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DmMacChannel:
    prior: np.ndarray
    kernel: np.ndarray
    ycomponents: Optional[tuple] = None
    constraints: dict = field(default_factory=dict)

    def __post_init__(self):
        prior = Pmf(self.prior).probs
        k = np.array(self.kernel, dtype=float)
        if k.ndim != 4 or k.shape[2] != prior.size:
            raise ValueError(f"kernel shape {k.shape} inconsistent with |S|={prior.size}")
        k = _stochastic("kernel", k)
        if self.ycomponents is not None:
            comps = tuple(int(c) for c in self.ycomponents)
            if int(np.prod(comps)) != k.shape[3]:
                raise ValueError(f"ycomponents {comps} do not multiply to |Y|={k.shape[3]}")
            object.__setattr__(self, "ycomponents", comps)
        cons = {}
        for var, q in dict(self.constraints).items():
            if var not in ("X1", "X2"):
                raise ValueError(f"constraint on unknown input {var!r}")
            cons[var] = float(q)
        object.__setattr__(self, "prior", prior)
        object.__setattr__(self, "kernel", k)
        object.__setattr__(self, "constraints", cons)

    @property
    def n_s(self):
        return self.kernel.shape[2]

    @property
    def n_x1(self):
        return self.kernel.shape[0]

    @property
    def n_x2(self):
        return self.kernel.shape[1]

    @property
    def n_y(self):
        return self.kernel.shape[3]

    @property
    def sizes(self):
        return self.n_s, self.n_x1, self.n_x2, self.n_y

    def __eq__(self, other):
        if not isinstance(other, DmMacChannel):
            return NotImplemented
        return (
            np.array_equal(self.prior, other.prior)
            and np.array_equal(self.kernel, other.kernel)
            and self.ycomponents == other.ycomponents
            and self.constraints == other.constraints
        )

    __hash__ = None


def prop1_caps(ch: DmMacChannel, corollary: bool = False) -> tuple:
    """(|U| cap, |V| cap) sufficient to exhaust the inner region.

    ``corollary`` gives the caps for the characterization carrying the
    extra nonnegativity constraint (one more symbol for V).
    """
    n = ch.n_s * ch.n_x1 * ch.n_x2
    extra = 2 if corollary else 1
    return (n + extra) * n, n + extra


@dataclass(frozen=True)
class AuxJoint:
    """P_X2 (|X2|,), P_{V|S,X2} (|S|,|X2|,|V|), P_{U,X1|S,V,X2} (|S|,|V|,|X2|,|U|,|X1|)."""

    px2: np.ndarray
    pv_given_sx2: np.ndarray
    pux1_given_svx2: np.ndarray

    def __post_init__(self):
        px2 = _stochastic("px2", self.px2)
        if px2.ndim != 1:
            raise ValueError("px2 must be a vector")
        pv = np.array(self.pv_given_sx2, dtype=float)
        if pv.ndim != 3 or pv.shape[1] != px2.size:
            raise ValueError(f"pv_given_sx2 shape {pv.shape} inconsistent")
        pv = _stochastic("pv_given_sx2", pv)
        s, x2, v = pv.shape
        pu = np.array(self.pux1_given_svx2, dtype=float)
        if pu.ndim != 5 or pu.shape[:3] != (s, v, x2):
            raise ValueError(f"pux1_given_svx2 shape {pu.shape} inconsistent")
        flat = _stochastic("pux1_given_svx2", pu.reshape(s, v, x2, -1))
        pu = flat.reshape(pu.shape)
        pu.setflags(write=False)
        object.__setattr__(self, "px2", px2)
        object.__setattr__(self, "pv_given_sx2", pv)
        object.__setattr__(self, "pux1_given_svx2", pu)

    @property
    def n_u(self):
        return self.pux1_given_svx2.shape[3]

    @property
    def n_v(self):
        return self.pv_given_sx2.shape[2]


@dataclass(frozen=True)
class InputDist:
    """P_X2 (|X2|,) and P_{X1|X2,S} (|X2|,|S|,|X1|)."""

    px2: np.ndarray
    px1_given_x2s: np.ndarray

    def __post_init__(self):
        px2 = _stochastic("px2", self.px2)
        p1 = np.array(self.px1_given_x2s, dtype=float)
        if p1.ndim != 3 or p1.shape[0] != px2.size:
            raise ValueError(f"px1_given_x2s shape {p1.shape} inconsistent")
        object.__setattr__(self, "px2", px2)
        object.__setattr__(self, "px1_given_x2s", _stochastic("px1_given_x2s", p1))


@dataclass(frozen=True)
class CommonMsgAux:
    """P_X2 (|X2|,) and P_{K,X1|S,X2} (|S|,|X2|,|K|,|X1|)."""

    px2: np.ndarray
    pkx1_given_sx2: np.ndarray

    def __post_init__(self):
        px2 = _stochastic("px2", self.px2)
        pk = np.array(self.pkx1_given_sx2, dtype=float)
        if pk.ndim != 4 or pk.shape[1] != px2.size:
            raise ValueError(f"pkx1_given_sx2 shape {pk.shape} inconsistent")
        s, x2 = pk.shape[:2]
        pk = _stochastic("pkx1_given_sx2", pk.reshape(s, x2, -1)).reshape(pk.shape)
        pk.setflags(write=False)
        object.__setattr__(self, "px2", px2)
        object.__setattr__(self, "pkx1_given_sx2", pk)

    @property
    def n_k(self):
        return self.pkx1_given_sx2.shape[2]

    def as_aux(self) -> AuxJoint:
        """The same measure as an AuxJoint with U = K and constant V."""
        s, x2 = self.pkx1_given_sx2.shape[:2]
        pv = np.ones((s, x2, 1))
        pu = self.pkx1_given_sx2[:, None]
        return AuxJoint(self.px2, pv, pu)


def _check_aux_fits(ch: DmMacChannel, px2, pv, pu):
    s, x1, x2, _ = ch.sizes
    if px2.shape[-1] != x2 or pv.shape[-3:-1] != (s, x2):
        raise ValueError("auxiliary distribution does not match channel input/state sizes")
    if pu.shape[-5] != s or pu.shape[-3] != x2 or pu.shape[-1] != x1:
        raise ValueError("auxiliary distribution does not match channel input/state sizes")
    if pu.shape[-4] != pv.shape[-1]:
        raise ValueError("|V| differs between the two auxiliary conditionals")


def assemble_tables(ch: DmMacChannel, px2, pv, pu) -> np.ndarray:
    """Joint tables over (S,U,V,X1,X2,Y); leading batch axes are allowed."""
    _check_aux_fits(ch, px2, pv, pu)
    return np.einsum(
        "s,...x,...sxv,...svxuk,kxsy->...suvkxy",
        ch.prior, px2, pv, pu, ch.kernel, optimize=True,
    )


def assemble_joint(ch: DmMacChannel, aux: AuxJoint) -> JointPmf:
    table = assemble_tables(ch, aux.px2, aux.pv_given_sx2, aux.pux1_given_svx2)
    return JointPmf(JOINT_NAMES, table)


def input_joint(ch: DmMacChannel, d: InputDist) -> JointPmf:
    s, x1, x2, _ = ch.sizes
    if d.px2.size != x2 or d.px1_given_x2s.shape != (x2, s, x1):
        raise ValueError("input distribution does not match channel sizes")
    table = np.einsum("s,x,xsk,kxsy->skxy", ch.prior, d.px2, d.px1_given_x2s, ch.kernel)
    return JointPmf(("S", "X1", "X2", "Y"), table)


def induced_input_dist(ch: DmMacChannel, aux: AuxJoint) -> InputDist:
    """P_X2 and P_{X1|X2,S} marginalized from the assembled joint."""
    t = assemble_joint(ch, aux).table.sum(axis=(1, 2, 5))  # (S, X1, X2)
    psx2 = t.sum(axis=1)  # (S, X2)
    cond = np.empty((ch.n_x2, ch.n_s, ch.n_x1))
    for x2 in range(ch.n_x2):
        for s in range(ch.n_s):
            m = psx2[s, x2]
            if m > 0:
                cond[x2, s] = t[s, :, x2] / m
            else:
                cond[x2, s] = 1.0 / ch.n_x1
    cond /= cond.sum(axis=-1, keepdims=True)
    px2 = t.sum(axis=(0, 1))
    return InputDist(px2 / px2.sum(), cond)


# ---------------------------------------------------------------- channels


def deterministic_channel(prior, n_x1, n_x2, n_y, f: Callable[[int, int, int], int]) -> DmMacChannel:
    """Channel with Y = f(x1, x2, s)."""
    prior = np.asarray(prior, dtype=float)
    k = np.zeros((n_x1, n_x2, prior.size, n_y))
    for x1 in range(n_x1):
        for x2 in range(n_x2):
            for s in range(prior.size):
                k[x1, x2, s, f(x1, x2, s)] = 1.0
    return DmMacChannel(prior, k)


def binary_example_channel(p: float, q1: Optional[float] = None, q2: Optional[float] = None) -> DmMacChannel:
    """Y = (X1 xor S xor Z1, X2) with S ~ Bern(1/2), Z1 ~ Bern(p); y = 2*y1 + y2."""
    if not (0.0 <= p <= 0.5):
        raise ValueError(f"noise probability p={p} outside [0, 1/2]")
    k = np.zeros((2, 2, 2, 4))
    for x1 in range(2):
        for x2 in range(2):
            for s in range(2):
                clean = x1 ^ s
                k[x1, x2, s, 2 * clean + x2] += 1.0 - p
                k[x1, x2, s, 2 * (1 - clean) + x2] += p
    cons = {}
    if q1 is not None:
        cons["X1"] = q1
    if q2 is not None:
        cons["X2"] = q2
    return DmMacChannel(np.array([0.5, 0.5]), k, ycomponents=(2, 2), constraints=cons)


def random_channel(rng: np.random.Generator, n_s=2, n_x1=2, n_x2=2, n_y=2) -> DmMacChannel:
    prior = rng.dirichlet(np.ones(n_s))
    k = rng.dirichlet(np.ones(n_y), size=(n_x1, n_x2, n_s))
    return DmMacChannel(prior, k)


# -------------------------------------------------------------- file format

_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"


def _floats(tokens, line):
    try:
        return [float(t) for t in tokens]
    except ValueError:
        raise ChannelFormatError(f"expected numbers, got {' '.join(tokens)!r}", line) from None


def _ints(tokens, line):
    try:
        vals = [int(t) for t in tokens]
    except ValueError:
        raise ChannelFormatError(f"expected integers, got {' '.join(tokens)!r}", line) from None
    return vals


def parse_channel(text: str) -> DmMacChannel:
    lines = []
    for no, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            lines.append((no, body))
    if not lines or lines[0][1].split() != ["dmmac", "v1"]:
        raise ChannelFormatError("missing 'dmmac v1' header", lines[0][0] if lines else 1)

    sizes = prior = ycomp = None
    rows = {}
    cons = {}
    i = 1
    while i < len(lines):
        no, body = lines[i]
        key, *rest = body.split()
        if key == "sizes":
            sizes = _ints(rest, no)
            if len(sizes) != 4 or min(sizes) < 1:
                raise ChannelFormatError("'sizes' needs four positive integers S X1 X2 Y", no)
        elif key == "ycomponents":
            ycomp = tuple(_ints(rest, no))
        elif key == "prior":
            prior = _floats(rest, no)
        elif key == "constraint":
            m = re.fullmatch(rf"constraint\s+(X1|X2)\s*<=\s*({_NUM})", body)
            if not m:
                raise ChannelFormatError("constraint must read 'constraint X1 <= q'", no)
            cons[m.group(1)] = float(m.group(2))
        elif key == "kernel":
            if sizes is None:
                raise ChannelFormatError("'kernel' before 'sizes'", no)
            n_rows = sizes[0] * sizes[1] * sizes[2]
            if len(lines) - i - 1 < n_rows:
                raise ChannelFormatError(f"kernel needs {n_rows} rows", no)
            for no_r, row in lines[i + 1 : i + 1 + n_rows]:
                if ":" not in row:
                    raise ChannelFormatError("kernel row must read 'x1 x2 s : w...'", no_r)
                head, tail = row.split(":", 1)
                idx = tuple(_ints(head.split(), no_r))
                if len(idx) != 3:
                    raise ChannelFormatError("kernel row index must be 'x1 x2 s'", no_r)
                if not all(0 <= a < b for a, b in zip(idx, (sizes[1], sizes[2], sizes[0]))):
                    raise ChannelFormatError(f"kernel index {idx} out of range", no_r)
                if idx in rows:
                    raise ChannelFormatError(f"duplicate kernel row {idx}", no_r)
                w = _floats(tail.split(), no_r)
                if len(w) != sizes[3]:
                    raise ChannelFormatError(f"kernel row has {len(w)} entries, expected {sizes[3]}", no_r)
                if any(x < 0 for x in w):
                    raise ChannelFormatError("negative kernel entry", no_r)
                err = abs(sum(w) - 1.0)
                if err > PARSE_ROW_TOL:
                    raise ChannelFormatError(f"kernel row sums to {sum(w)!r}", no_r)
                rows[idx] = (w, err, no_r)
            i += n_rows
        else:
            raise ChannelFormatError(f"unknown directive {key!r}", no)
        i += 1

    if sizes is None:
        raise ChannelFormatError("missing 'sizes' line")
    if prior is None:
        raise ChannelFormatError("missing 'prior' line")
    if not rows:
        raise ChannelFormatError("missing 'kernel' block")
    n_s, n_x1, n_x2, n_y = sizes
    if len(prior) != n_s:
        raise ChannelFormatError(f"prior has {len(prior)} entries, expected {n_s}")
    if any(x < 0 for x in prior) or abs(sum(prior) - 1.0) > PARSE_ROW_TOL:
        raise ChannelFormatError("prior is not a probability vector")
    prior = np.array(prior)
    if abs(prior.sum() - 1.0) > MASS_TOL:
        prior = prior / prior.sum()
    k = np.empty((n_x1, n_x2, n_s, n_y))
    for (x1, x2, s), (w, err, _) in rows.items():
        w = np.array(w)
        # rows within parse tolerance but outside the model tolerance are rescaled
        k[x1, x2, s] = w / w.sum() if err > MASS_TOL else w
    if ycomp is not None and int(np.prod(ycomp)) != n_y:
        raise ChannelFormatError(f"ycomponents {ycomp} do not multiply to {n_y}")
    return DmMacChannel(prior, k, ycomponents=ycomp, constraints=cons)


def serialize_channel(ch: DmMacChannel) -> str:
    out = ["dmmac v1", "sizes {} {} {} {}".format(*ch.sizes)]
    if ch.ycomponents is not None:
        out.append("ycomponents " + " ".join(str(c) for c in ch.ycomponents))
    out.append("prior " + " ".join(repr(float(p)) for p in ch.prior))
    out.append("kernel")
    for x1 in range(ch.n_x1):
        for x2 in range(ch.n_x2):
            for s in range(ch.n_s):
                w = " ".join(repr(float(v)) for v in ch.kernel[x1, x2, s])
                out.append(f"{x1} {x2} {s} : {w}")
    for var in sorted(ch.constraints):
        out.append(f"constraint {var} <= {ch.constraints[var]!r}")
    return "\n".join(out) + "\n"


def load_channel(path) -> DmMacChannel:
    with open(path, encoding="utf-8") as fh:
        return parse_channel(fh.read())
