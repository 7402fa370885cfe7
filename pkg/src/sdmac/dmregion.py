"""Single-letter rate bounds of the discrete memoryless model.

Each function takes a channel and one fixed distribution and returns the
right-hand sides of the two rate constraints ``R1 <= a`` and
``Rc + R1 <= b``.  The ``*_batch`` variants evaluate many distributions at
once from entropy atoms and back the search module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .infocore import JointPmf, cond_mutual_information as cmi
from .macmodel import (
    AuxJoint,
    CommonMsgAux,
    DmMacChannel,
    InputDist,
    _check_aux_fits,
    assemble_joint,
    assemble_tables,
    input_joint,
)

NOSTATE_TOL = 1e-12


@dataclass(frozen=True)
class RateBounds:
    a: float  # bound on R1
    b: float  # bound on Rc + R1

    def __iter__(self):
        return iter((self.a, self.b))


def inner_bounds(ch: DmMacChannel, aux: AuxJoint) -> RateBounds:
    j = assemble_joint(ch, aux)
    a = cmi(j, "U", "Y", ("V", "X2")) - cmi(j, "U", "S", ("V", "X2"))
    b = cmi(j, ("U", "V", "X2"), "Y") - cmi(j, ("U", "V", "X2"), "S")
    return RateBounds(a, b)


def cprime_bounds(ch: DmMacChannel, aux: AuxJoint) -> RateBounds:
    """Bounds of the region where Encoder 2 ignores the state (V constant)."""
    if aux.n_v != 1:
        raise ValueError(f"cprime_bounds needs |V| = 1, got {aux.n_v}")
    j = assemble_joint(ch, aux).marginal(("S", "U", "X1", "X2", "Y"))
    a = cmi(j, "U", "Y", "X2") - cmi(j, "U", "S", "X2")
    b = cmi(j, ("U", "X2"), "Y") - cmi(j, ("U", "X2"), "S")
    return RateBounds(a, b)


def outer_bounds_t3(ch: DmMacChannel, d: InputDist) -> RateBounds:
    j = input_joint(ch, d)
    a = cmi(j, "X1", "Y", ("S", "X2"))
    b = cmi(j, ("X1", "X2"), "Y", "S") - cmi(j, "X2", "S", "Y")
    return RateBounds(a, b)


def cm_capacity_value(ch: DmMacChannel, k: CommonMsgAux) -> float:
    """I(K,X2;Y) - I(K,X2;S) for one common-message distribution."""
    j = assemble_joint(ch, k.as_aux())
    return cmi(j, ("U", "X2"), "Y") - cmi(j, ("U", "X2"), "S")


def corollary1_constraint(ch: DmMacChannel, aux: AuxJoint) -> float:
    j = assemble_joint(ch, aux)
    return cmi(j, ("V", "X2"), "Y") - cmi(j, ("V", "X2"), "S")


def collapse_state(ch: DmMacChannel) -> np.ndarray:
    """Kernel W[x1, x2, y] of a channel whose law does not depend on the state."""
    k = ch.kernel
    if np.max(np.abs(k - k[:, :, :1, :])) > NOSTATE_TOL:
        raise ValueError("channel law depends on the state")
    return k[:, :, 0, :]


def nostate_bounds(ch: DmMacChannel, pz, px1_given_z, px2_given_z) -> RateBounds:
    """Bounds for a state-independent channel with a shared time-sharing Z."""
    w = collapse_state(ch)
    pz = np.asarray(pz, dtype=float)
    p1 = np.asarray(px1_given_z, dtype=float)
    p2 = np.asarray(px2_given_z, dtype=float)
    if p1.shape != (pz.size, ch.n_x1) or p2.shape != (pz.size, ch.n_x2):
        raise ValueError("input conditionals do not match |Z| and the input alphabets")
    table = np.einsum("z,zk,zx,kxy->zkxy", pz, p1, p2, w)
    j = JointPmf(("Z", "X1", "X2", "Y"), table)
    return RateBounds(cmi(j, "X1", "Y", ("Z", "X2")), cmi(j, ("X1", "X2"), "Y"))


# ------------------------------------------------------------ batched atoms

_AX = {"S": 1, "U": 2, "V": 3, "X1": 4, "X2": 5, "Y": 6}


def _batch_entropy(tables: np.ndarray, group: str) -> np.ndarray:
    keep = {_AX[g] for g in group.split(",")}
    drop = tuple(i for i in range(1, tables.ndim) if i not in keep)
    return _plogp_sum(tables.sum(axis=drop))


def _plogp_sum(m: np.ndarray) -> np.ndarray:
    m = m.reshape(m.shape[0], -1)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(m > 1e-15, m * np.log2(np.where(m > 1e-15, m, 1.0)), 0.0)
    return -terms.sum(axis=1)


def inner_terms_batch(ch: DmMacChannel, px2, pv, pu) -> tuple:
    """(a, b, V-X2 rate constraint) for a batch of auxiliary distributions.

    Arrays carry one leading batch axis.  Uses
    a = H(V,X2,Y) - H(U,V,X2,Y) - H(S,V,X2) + H(S,U,V,X2),
    b = H(Y) - H(U,V,X2,Y) - H(S) + H(S,U,V,X2),
    c = H(Y) - H(V,X2,Y) - H(S) + H(S,V,X2).
    X1 never appears, so it is summed out while assembling.
    """
    _check_aux_fits(ch, px2, pv, pu)
    # weight of (s, v, x2) first, then one two-operand contraction over x1
    w = ch.prior[None, :, None, None] * np.swapaxes(pv, 2, 3) * px2[:, None, None, :]
    t = np.einsum("nsvxuk,kxsy->nsuvxy", pu * w[..., None, None], ch.kernel)
    suvx = t.sum(axis=5)
    uvxy = t.sum(axis=1)
    vxy = uvxy.sum(axis=1)
    svx = suvx.sum(axis=2)
    h_suvx, h_uvxy, h_vxy, h_svx = (_plogp_sum(m) for m in (suvx, uvxy, vxy, svx))
    h_y = _plogp_sum(vxy.sum(axis=(1, 2)))
    h_s = _plogp_sum(svx.sum(axis=(2, 3)))
    a = h_vxy - h_uvxy - h_svx + h_suvx
    b = h_y - h_uvxy - h_s + h_suvx
    c = h_y - h_vxy - h_s + h_svx
    return a, b, c


def outer_terms_batch(ch: DmMacChannel, px2, px1) -> tuple:
    """(a, b) of the alternative outer bound for batched P_X2, P_{X1|X2,S}."""
    t = np.einsum("s,nx,nxsk,kxsy->nskxy", ch.prior, px2, px1, ch.kernel)
    t = t[:, :, None, None]  # singleton U, V axes keep the atom axis map valid
    e = {g: _batch_entropy(t, g) for g in ("S,X2", "S,X1,X2", "S,X1,X2,Y", "S,X2,Y", "S", "Y", "X2,Y", "S,Y")}
    # I(X1;Y|S,X2) = H(S,X1,X2) + H(S,X2,Y) - H(S,X1,X2,Y) - H(S,X2)
    a = e["S,X1,X2"] + e["S,X2,Y"] - e["S,X1,X2,Y"] - e["S,X2"]
    # I(X1,X2;Y|S) - I(X2;S|Y)
    b = (e["S,X1,X2"] + e["S,Y"] - e["S,X1,X2,Y"] - e["S"]) - (
        e["X2,Y"] + e["S,Y"] - e["S,X2,Y"] - e["Y"]
    )
    return a, b
