"""Fourier-Motzkin elimination over rate inequalities with entropic constants.

Right-hand sides are exact rational combinations of joint-entropy atoms
H(A).  Mutual informations are expanded into atoms on input, so the chain
rule holds by plain coefficient arithmetic.  Redundancy pruning uses a
greedy decomposition into Shannon building blocks, which is conservative:
a true but non-decomposable inequality is kept.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional

DEFAULT_TARGETS = ("Rc", "R1")
MAX_GREEDY_STEPS = 10_000


class SystemParseError(ValueError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.line = line
        self.col = col


def _atom_key(a: frozenset):
    return (len(a), tuple(sorted(a)))


class InfoExpr:
    """Rational combination of entropy atoms; zero terms and H(empty) are dropped."""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Mapping] = None):
        out = {}
        for atom, c in (terms or {}).items():
            atom = frozenset(atom)
            c = Fraction(c)
            if atom and c:
                out[atom] = out.get(atom, Fraction(0)) + c
        self.terms = {a: c for a, c in out.items() if c}

    @classmethod
    def h(cls, group: Iterable[str]) -> "InfoExpr":
        return cls({frozenset(group): 1})

    def __add__(self, other):
        t = dict(self.terms)
        for a, c in other.terms.items():
            t[a] = t.get(a, Fraction(0)) + c
        return InfoExpr(t)

    def __neg__(self):
        return InfoExpr({a: -c for a, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, k) -> "InfoExpr":
        k = Fraction(k)
        return InfoExpr({a: k * c for a, c in self.terms.items()})

    def __eq__(self, other):
        return isinstance(other, InfoExpr) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: _atom_key(t[0]))

    def evaluate(self, values: Mapping) -> Fraction:
        """Value under an assignment atom -> number (atoms are frozensets)."""
        return sum((c * values[a] for a, c in self.terms.items()), Fraction(0))

    def __repr__(self):
        return f"InfoExpr({render_expr(self)})"


def expand_mi(a, b, c=()) -> InfoExpr:
    """I(a;b|c) = H(a,c) + H(b,c) - H(a,b,c) - H(c)."""
    a, b, c = frozenset(a), frozenset(b), frozenset(c)
    if not a or not b:
        raise ValueError("mutual information needs nonempty groups")
    if a & b or a & c or b & c:
        raise ValueError(f"groups overlap: {sorted(a)}, {sorted(b)}, {sorted(c)}")
    return InfoExpr({a | c: 1}) + InfoExpr({b | c: 1}) - InfoExpr({a | b | c: 1}) - InfoExpr({c: 1})


def apply_independence(e: InfoExpr, facts) -> InfoExpr:
    """Replace the atom H(A u B) by H(A) + H(B) for each fact A _|_ B, to a fixed point."""
    facts = [(frozenset(a), frozenset(b)) for a, b in facts]
    t = dict(e.terms)
    changed = True
    while changed:
        changed = False
        for a, b in facts:
            c = t.pop(a | b, None)
            if c is None:
                continue
            changed = True
            for part in (a, b):
                t[part] = t.get(part, Fraction(0)) + c
            t = {k: v for k, v in t.items() if v}
    return InfoExpr(t)


@dataclass(frozen=True)
class RateIneq:
    """sum(lhs[v] * v) <= rhs, scaled so the first nonzero coefficient is +-1."""

    lhs: tuple  # sorted (variable, Fraction) pairs, no zeros
    rhs: InfoExpr

    @classmethod
    def make(cls, lhs: Mapping, rhs: InfoExpr) -> "RateIneq":
        items = sorted((v, Fraction(c)) for v, c in lhs.items() if c)
        if items:
            k = abs(items[0][1])
        elif rhs:
            k = abs(rhs.sorted_terms()[0][1])
        else:
            k = Fraction(1)
        return cls(tuple((v, c / k) for v, c in items), rhs.scale(1 / k))

    @property
    def coeffs(self) -> dict:
        return dict(self.lhs)

    def coeff(self, var: str) -> Fraction:
        return self.coeffs.get(var, Fraction(0))

    def holds(self, rates: Mapping, atoms: Mapping) -> bool:
        return sum((c * rates[v] for v, c in self.lhs), Fraction(0)) <= self.rhs.evaluate(atoms)


@dataclass(frozen=True)
class IneqSystem:
    inequalities: tuple
    rates: tuple = ()
    nonneg_rates: frozenset = frozenset()
    independence_facts: tuple = ()
    eliminate: tuple = field(default=())

    def __post_init__(self):
        facts = tuple((frozenset(a), frozenset(b)) for a, b in self.independence_facts)
        for a, b in facts:
            if not a or not b or a & b:
                raise ValueError(f"independence fact needs disjoint nonempty groups: {sorted(a)}, {sorted(b)}")
        ineqs = []
        for q in self.inequalities:
            q = RateIneq.make(q.coeffs, apply_independence(q.rhs, facts))
            if q not in ineqs:
                ineqs.append(q)
        declared = set(self.rates)
        for q in ineqs:
            for v, _ in q.lhs:
                if v not in declared:
                    raise ValueError(f"undeclared rate variable {v}")
        for v in set(self.nonneg_rates) | set(self.eliminate):
            if v not in declared:
                raise ValueError(f"undeclared rate variable {v}")
        object.__setattr__(self, "inequalities", tuple(sorted(ineqs, key=_ineq_sort_key)))
        object.__setattr__(self, "rates", tuple(sorted(declared)))
        object.__setattr__(self, "nonneg_rates", frozenset(self.nonneg_rates))
        object.__setattr__(self, "independence_facts", facts)
        object.__setattr__(self, "eliminate", tuple(self.eliminate))

    def replace(self, **kw) -> "IneqSystem":
        d = dict(
            inequalities=self.inequalities,
            rates=self.rates,
            nonneg_rates=self.nonneg_rates,
            independence_facts=self.independence_facts,
            eliminate=self.eliminate,
        )
        d.update(kw)
        return IneqSystem(**d)

    def holds(self, rates: Mapping, atoms: Mapping) -> bool:
        if any(rates[v] < 0 for v in self.nonneg_rates):
            return False
        return all(q.holds(rates, atoms) for q in self.inequalities)


# ------------------------------------------------------------- elimination


def fme_eliminate(sys: IneqSystem, var: str) -> IneqSystem:
    """Project out ``var`` by pairing each upper bound with each lower bound."""
    if not any(q.coeff(var) for q in sys.inequalities):
        return sys
    upper, lower, rest = [], [], []
    for q in sys.inequalities:
        c = q.coeff(var)
        (upper if c > 0 else lower if c < 0 else rest).append(q)
    if var in sys.nonneg_rates:
        lower.append(RateIneq.make({var: -1}, InfoExpr()))
    out = list(rest)
    for u in upper:
        cu = u.coeff(var)
        for lo in lower:
            cl = -lo.coeff(var)
            lhs = {}
            for v, c in u.lhs:
                lhs[v] = lhs.get(v, Fraction(0)) + c / cu
            for v, c in lo.lhs:
                lhs[v] = lhs.get(v, Fraction(0)) + c / cl
            lhs.pop(var, None)
            out.append(RateIneq.make(lhs, u.rhs.scale(1 / cu) + lo.rhs.scale(1 / cl)))
    return sys.replace(
        inequalities=tuple(out),
        rates=tuple(r for r in sys.rates if r != var),
        nonneg_rates=sys.nonneg_rates - {var},
        eliminate=tuple(v for v in sys.eliminate if v != var),
    )


def shannon_nonneg(e: InfoExpr) -> bool:
    """True if ``e`` greedily splits into nonnegative multiples of H(P) - H(N)
    (N a subset of P), I(P1;P2|P1 n P2) blocks and plain atoms.

    The most negative-looking atom (largest set first) is cancelled against a
    pair of positive atoms covering it exactly, else against a positive superset.
    """
    t = dict(e.terms)
    for _ in range(MAX_GREEDY_STEPS):
        neg = sorted((a for a, c in t.items() if c < 0), key=_atom_key, reverse=True)
        if not neg:
            return True
        n = neg[0]
        pos = sorted((a for a, c in t.items() if c > 0), key=_atom_key)
        step = None
        for i, p1 in enumerate(pos):
            for p2 in pos[i + 1:]:
                if p1 | p2 == n and p1 != n and p2 != n:
                    step = ((p1, p2), (n, p1 & p2))
                    break
            if step:
                break
        if step is None:
            sup = [p for p in pos if n < p]
            if sup:
                step = ((sup[0],), (n,))
        if step is None:
            return False
        plus, minus = step
        k = min([-t[n]] + [t[p] for p in plus])
        for p in plus:
            t[p] -= k
        for m in minus:
            if m:
                t[m] = t.get(m, Fraction(0)) + k
        t = {a: c for a, c in t.items() if c}
    return False


def _implies(b: RateIneq, a: RateIneq, nonneg) -> bool:
    """Does b, with nonnegative rates and Shannon inequalities, imply a?"""
    cb, ca = b.coeffs, a.coeffs
    for v in set(cb) | set(ca):
        surplus = cb.get(v, Fraction(0)) - ca.get(v, Fraction(0))
        if surplus < 0 or (surplus > 0 and v not in nonneg):
            return False
    return shannon_nonneg(a.rhs - b.rhs)


def prune_redundant(sys: IneqSystem) -> IneqSystem:
    kept = []
    for q in sys.inequalities:
        if not q.lhs and shannon_nonneg(q.rhs):
            continue
        kept.append(q)
    i = 0
    while i < len(kept):
        a = kept[i]
        if any(_implies(b, a, sys.nonneg_rates) for j, b in enumerate(kept) if j != i):
            del kept[i]
        else:
            i += 1
    return sys.replace(inequalities=tuple(kept))


def default_elimination_order(sys: IneqSystem) -> tuple:
    return sys.eliminate or tuple(r for r in sys.rates if r not in DEFAULT_TARGETS)


def reduce_system(sys: IneqSystem, order: Optional[Iterable[str]] = None) -> IneqSystem:
    """Eliminate each variable in turn, pruning after every step."""
    order = default_elimination_order(sys) if order is None else tuple(order)
    sys = prune_redundant(sys)
    for v in order:
        sys = prune_redundant(fme_eliminate(sys, v))
    return sys.replace(eliminate=())


# ------------------------------------------------------------- text format

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<op><=|>=|<|>|_\|_|[-+*;|,()])|(?P<name>[A-Za-z_][A-Za-z0-9_]*))"
)


class _Lexer:
    def __init__(self, text: str, line: int):
        self.text, self.line = text, line
        self.toks = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                col = pos + len(text[pos:]) - len(text[pos:].lstrip()) + 1
                raise SystemParseError(f"unexpected character {text[col - 1]!r}", line, col)
            kind = m.lastgroup
            self.toks.append((kind, m.group(kind), m.start(kind) + 1))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None, len(self.text) + 1)

    def next(self):
        t = self.peek()
        self.i += 1
        return t

    def expect(self, value):
        kind, v, col = self.next()
        if v != value:
            raise SystemParseError(f"expected {value!r}, got {v!r}", self.line, col)

    def fail(self, msg):
        raise SystemParseError(msg, self.line, self.peek()[2])


def _parse_group(lx: _Lexer) -> frozenset:
    names = []
    while True:
        kind, v, col = lx.next()
        if kind != "name":
            raise SystemParseError(f"expected a variable name, got {v!r}", lx.line, col)
        names.append(v)
        if lx.peek()[1] != ",":
            break
        lx.next()
    if len(set(names)) != len(names):
        lx.fail("repeated variable in group")
    return frozenset(names)


def _parse_linear(lx: _Lexer, atom, stop):
    """Signed sum of ``[coef *] atom`` terms up to a token in ``stop``."""
    terms = []
    first = True
    while lx.peek()[1] not in stop:
        sign = 1
        if lx.peek()[1] in ("+", "-"):
            sign = -1 if lx.next()[1] == "-" else 1
        elif not first:
            lx.fail("expected '+' or '-'")
        coef = Fraction(1)
        if lx.peek()[0] == "num":
            coef = Fraction(lx.next()[1])
            if lx.peek()[1] == "*":
                lx.next()
            elif lx.peek()[1] in stop or lx.peek()[1] in ("+", "-"):
                terms.append((sign * coef, None))
                first = False
                continue
            else:
                lx.fail("expected '*' after coefficient")
        terms.append((sign * coef, atom(lx)))
        first = False
    if first:
        lx.fail("empty expression")
    return terms


def _info_atom(lx: _Lexer) -> InfoExpr:
    kind, v, col = lx.next()
    if v == "H":
        lx.expect("(")
        g = _parse_group(lx)
        lx.expect(")")
        return InfoExpr.h(g)
    if v == "I":
        lx.expect("(")
        a = _parse_group(lx)
        lx.expect(";")
        b = _parse_group(lx)
        c = frozenset()
        if lx.peek()[1] == "|":
            lx.next()
            c = _parse_group(lx)
        lx.expect(")")
        try:
            return expand_mi(a, b, c)
        except ValueError as e:
            raise SystemParseError(str(e), lx.line, col) from None
    raise SystemParseError(f"expected I(...) or H(...), got {v!r}", lx.line, col)


def _rate_atom(lx: _Lexer) -> str:
    kind, v, col = lx.next()
    if kind != "name":
        raise SystemParseError(f"expected a rate variable, got {v!r}", lx.line, col)
    return v


def _parse_info(lx: _Lexer, stop) -> InfoExpr:
    e = InfoExpr()
    for c, atom in _parse_linear(lx, _info_atom, stop):
        if atom is None:
            if c:
                lx.fail("constant terms are not allowed in an information expression")
            continue
        e = e + atom.scale(c)
    return e


def _parse_rates(lx: _Lexer, stop) -> dict:
    lhs = {}
    for c, v in _parse_linear(lx, _rate_atom, stop):
        if v is None:
            if c:
                lx.fail("constant terms are not allowed on the rate side")
            continue
        lhs[v] = lhs.get(v, Fraction(0)) + c
    return lhs


_SENSES = ("<=", "<", ">=", ">")


def parse_system(text: str) -> IneqSystem:
    """Parse the line-oriented system format.

    Directives: ``rates``, ``nonneg``, ``eliminate`` (space-separated
    names) and ``fact A _|_ B``.  Inequalities put rates on the left and
    an information expression on the right; ``<`` and ``>`` are read as
    non-strict.  ``#`` starts a comment.
    """
    rates, nonneg, eliminate, facts, ineqs = [], set(), [], [], []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        word = line.split()[0]
        if word in ("rates", "nonneg", "eliminate"):
            names = line.split()[1:]
            for nm in names:
                if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", nm):
                    raise SystemParseError(f"bad variable name {nm!r}", ln, line.index(nm) + 1)
            if word == "rates":
                rates.extend(names)
            elif word == "nonneg":
                nonneg.update(names)
            else:
                eliminate.extend(names)
            continue
        if word == "fact":
            lx = _Lexer(line, ln)
            lx.next()
            a = _parse_group(lx)
            lx.expect("_|_")
            b = _parse_group(lx)
            if lx.peek()[0] is not None:
                lx.fail("trailing input after fact")
            if a & b:
                raise SystemParseError("independent groups overlap", ln, 1)
            facts.append((a, b))
            continue
        lx = _Lexer(line, ln)
        lhs = _parse_rates(lx, _SENSES)
        kind, sense, col = lx.next()
        if sense not in _SENSES:
            raise SystemParseError("expected an inequality sign", ln, col)
        rhs = _parse_info(lx, (None,))
        if sense in (">", ">="):
            lhs = {v: -c for v, c in lhs.items()}
            rhs = -rhs
        ineqs.append(RateIneq.make(lhs, rhs))
    for v in nonneg | set(eliminate):
        if v not in rates:
            rates.append(v)
    try:
        return IneqSystem(tuple(ineqs), tuple(rates), frozenset(nonneg), tuple(facts), tuple(eliminate))
    except ValueError as e:
        raise SystemParseError(str(e), 0, 0) from None


def _fmt_coef(c: Fraction, first: bool) -> str:
    sign = "-" if c < 0 else ("" if first else "+")
    mag = abs(c)
    body = "" if mag == 1 else f"{mag}*"
    return f"{sign}{body}" if first else f" {sign} {body}"


def render_expr(e: InfoExpr) -> str:
    if not e:
        return "0"
    out = []
    for i, (atom, c) in enumerate(e.sorted_terms()):
        out.append(_fmt_coef(c, i == 0) + f"H({','.join(sorted(atom))})")
    return "".join(out)


def render_lhs(q: RateIneq) -> str:
    if not q.lhs:
        return "0"
    return "".join(_fmt_coef(c, i == 0) + v for i, (v, c) in enumerate(q.lhs))


def render_ineq(q: RateIneq) -> str:
    return f"{render_lhs(q)} <= {render_expr(q.rhs)}"


def _ineq_sort_key(q: RateIneq):
    return (render_lhs(q), render_expr(q.rhs))


def render_system(sys: IneqSystem) -> str:
    lines = []
    if sys.rates:
        lines.append("rates " + " ".join(sys.rates))
    if sys.nonneg_rates:
        lines.append("nonneg " + " ".join(sorted(sys.nonneg_rates)))
    for a, b in sorted(sys.independence_facts, key=lambda f: (sorted(f[0]), sorted(f[1]))):
        lines.append(f"fact {','.join(sorted(a))} _|_ {','.join(sorted(b))}")
    if sys.eliminate:
        lines.append("eliminate " + " ".join(sys.eliminate))
    lines.extend(render_ineq(q) for q in sys.inequalities)
    return "\n".join(lines) + "\n"
