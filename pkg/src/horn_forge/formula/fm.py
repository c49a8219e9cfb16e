"""Exact satisfiability of conjunctions by Fourier-Motzkin elimination.

Every derived row carries the multipliers that produced it from the input
constraints, so a contradiction comes with a Farkas certificate for free.
Equalities are eliminated first by substitution (multipliers may then be
negative, which is allowed for equality rows only).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, floor
from typing import Iterable, Sequence

from ..caps import get_caps
from ..errors import ResourceError
from .core import EQ, GE, GT, LinConstraint, LinTerm, _check_rel

Assignment = dict  # variable name -> Fraction


@dataclass(frozen=True)
class FarkasCertificate:
    """Multipliers ``(constraint index, lambda)``; lambda >= 0 except on equalities."""

    multipliers: tuple[tuple[int, Fraction], ...]

    def combine(self, constraints: Sequence[LinConstraint]) -> tuple[LinTerm, str]:
        """Weighted sum of the referenced constraints and the relation it carries."""
        total = LinTerm()
        rel = EQ
        for idx, lam in self.multipliers:
            c = constraints[idx]
            total = total + c.term.scale(lam)
            if lam != 0 and c.rel != EQ:
                if c.rel == GT:
                    rel = GT
                elif rel == EQ:
                    rel = GE
        return total, rel

    def verify(self, constraints: Sequence[LinConstraint]) -> bool:
        for idx, lam in self.multipliers:
            if not 0 <= idx < len(constraints):
                return False
            if lam < 0 and constraints[idx].rel != EQ:
                return False
        total, rel = self.combine(constraints)
        return total.is_constant and not _check_rel(total.constant, rel)


@dataclass(frozen=True)
class Sat:
    assignment: Assignment

    def __bool__(self):
        return True


@dataclass(frozen=True)
class Unsat:
    certificate: FarkasCertificate | None = None

    def __bool__(self):
        return False


@dataclass
class _Row:
    coeffs: dict
    const: Fraction
    rel: str
    prov: dict = field(default_factory=dict)

    def combine(self, k: Fraction, other: _Row, j: Fraction = Fraction(1)) -> _Row:
        """Return ``j*self + k*other``."""
        coeffs = {v: c * j for v, c in self.coeffs.items()}
        for v, c in other.coeffs.items():
            nc = coeffs.get(v, 0) + k * c
            if nc:
                coeffs[v] = nc
            else:
                coeffs.pop(v, None)
        prov = {i: m * j for i, m in self.prov.items()}
        for i, m in other.prov.items():
            prov[i] = prov.get(i, 0) + k * m
        rel = _merge_rel(self.rel, other.rel)
        return _Row(coeffs, self.const * j + other.const * k, rel, prov)

    def value(self, assignment) -> Fraction:
        return self.const + sum(c * assignment[v] for v, c in self.coeffs.items())


def _merge_rel(a: str, b: str) -> str:
    if GT in (a, b):
        return GT
    if GE in (a, b):
        return GE
    return EQ


def _rows(constraints: Sequence[LinConstraint]) -> list[_Row]:
    return [_Row(dict(c.term.coeffs), c.term.constant, c.rel, {i: Fraction(1)})
            for i, c in enumerate(constraints)]


def _certificate(row: _Row) -> FarkasCertificate:
    return FarkasCertificate(tuple(sorted((i, m) for i, m in row.prov.items() if m != 0)))


class _Contradiction(Exception):
    def __init__(self, row):
        self.row = row


def _violated(row: _Row) -> bool:
    return not row.coeffs and not _check_rel(row.const, row.rel)


def _prune(rows: list[_Row]) -> list[_Row]:
    """Drop trivially true rows and keep only the tightest row per direction."""
    best: dict = {}
    order: list = []
    for row in rows:
        if not row.coeffs:
            if not _check_rel(row.const, row.rel):
                raise _Contradiction(row)
            continue
        if row.rel == EQ:
            key = ("=", id(row))
            best[key] = row
            order.append(key)
            continue
        lead = abs(next(iter(sorted(row.coeffs.items())))[1])
        direction = tuple(sorted((v, c / lead) for v, c in row.coeffs.items()))
        bound = row.const / lead
        prev = best.get(direction)
        if prev is None:
            best[direction] = (bound, row)
            order.append(direction)
            continue
        pbound, prow = prev
        # smaller constant = tighter for ``a.x + c >= 0``; on ties strict wins
        if bound < pbound or (bound == pbound and row.rel == GT and prow.rel != GT):
            best[direction] = (bound, row)
    out = []
    for key in order:
        item = best[key]
        out.append(item if isinstance(item, _Row) else item[1])
    return out


def _substitute_eq(rows: list[_Row], eq: _Row, v: str) -> list[_Row]:
    a = eq.coeffs[v]
    out = []
    for row in rows:
        c = row.coeffs.get(v)
        if c is None:
            out.append(row)
        else:
            out.append(row.combine(-c / a, eq))
    return out


def _choose_var(rows: list[_Row], candidates: Iterable[str]) -> str:
    best = None
    for v in sorted(candidates):
        pos = sum(1 for r in rows if r.coeffs.get(v, 0) > 0)
        neg = sum(1 for r in rows if r.coeffs.get(v, 0) < 0)
        score = pos * neg - pos - neg
        if best is None or score < best[0]:
            best = (score, v)
    return best[1]


def _fm_step(rows: list[_Row], v: str, cap: int) -> tuple[list[_Row], list[_Row]]:
    """Eliminate ``v`` from inequality rows. Returns (new rows, rows that mentioned v)."""
    pos = [r for r in rows if r.coeffs.get(v, 0) > 0]
    neg = [r for r in rows if r.coeffs.get(v, 0) < 0]
    rest = [r for r in rows if v not in r.coeffs]
    if len(rest) + len(pos) * len(neg) > cap:
        raise ResourceError(f"Fourier-Motzkin exceeds {cap} constraints")
    for p in pos:
        a = p.coeffs[v]
        for n in neg:
            b = -n.coeffs[v]
            rest.append(p.combine(a, n, b))  # b*p + a*n cancels v
    return _prune(rest), pos + neg


@dataclass
class _Elimination:
    kind: str  # "eq" or "fm"
    var: str
    rows: list


def _run(constraints: Sequence[LinConstraint], eliminate: Iterable[str] | None,
         cap: int) -> tuple[list[_Row], list[_Elimination]]:
    rows = _prune(_rows(constraints))
    targets = None if eliminate is None else set(eliminate)
    steps: list[_Elimination] = []
    # equalities first
    while True:
        eq = None
        for r in rows:
            if r.rel == EQ:
                names = sorted(v for v in r.coeffs if targets is None or v in targets)
                if names:
                    eq, v = r, names[0]
                    break
        if eq is None:
            break
        rows = [r for r in rows if r is not eq]
        rows = _prune(_substitute_eq(rows, eq, v))
        steps.append(_Elimination("eq", v, [eq]))
    # split remaining equalities that mention targets is impossible here; the rest are kept
    while True:
        live = {v for r in rows if r.rel != EQ for v in r.coeffs}
        if targets is not None:
            live &= targets
        if not live:
            break
        v = _choose_var(rows, live)
        ineq = [r for r in rows if r.rel != EQ]
        eqs = [r for r in rows if r.rel == EQ]
        rows, used = _fm_step(ineq, v, cap)
        rows = eqs + rows
        steps.append(_Elimination("fm", v, used))
    return rows, steps


def sat_cube(constraints: Sequence[LinConstraint], cap: int | None = None) -> Sat | Unsat:
    """Decide a conjunction over the rationals.

    ``Sat`` carries a total assignment (integers nearest zero are preferred);
    ``Unsat`` carries a Farkas certificate indexing into ``constraints``.
    """
    constraints = list(constraints)
    cap = cap or get_caps().fm
    try:
        rows, steps = _run(constraints, None, cap)
    except _Contradiction as exc:
        return Unsat(_certificate(exc.row))
    for r in rows:
        if _violated(r):
            return Unsat(_certificate(r))
    assignment: dict[str, Fraction] = {}
    for step in reversed(steps):
        if step.kind == "eq":
            (eq,) = step.rows
            a = eq.coeffs[step.var]
            rest = eq.const + sum(c * _value(assignment, w) for w, c in eq.coeffs.items()
                                  if w != step.var)
            assignment[step.var] = -rest / a
        else:
            assignment[step.var] = _pick(step.rows, step.var, assignment)
    for c in constraints:
        for v in c.variables():
            assignment.setdefault(v, Fraction(0))
    if not all(c.holds(assignment) for c in constraints):  # pragma: no cover - internal invariant
        raise AssertionError("Fourier-Motzkin back-substitution produced a non-model")
    return Sat(dict(sorted(assignment.items())))


def _value(assignment, v):
    # variables never constrained after elimination default to zero
    return assignment.setdefault(v, Fraction(0))


def _pick(rows: list[_Row], v: str, assignment) -> Fraction:
    lo = hi = None
    lo_strict = hi_strict = False
    for r in rows:
        a = r.coeffs[v]
        rest = r.const + sum(c * _value(assignment, w) for w, c in r.coeffs.items() if w != v)
        bound = -rest / a
        strict = r.rel == GT
        if a > 0:
            if lo is None or bound > lo or (bound == lo and strict):
                lo, lo_strict = bound, strict
        else:
            if hi is None or bound < hi or (bound == hi and strict):
                hi, hi_strict = bound, strict
    return choose_value(lo, lo_strict, hi, hi_strict)


def choose_value(lo, lo_strict, hi, hi_strict) -> Fraction:
    """Deterministic point of an interval: the integer nearest zero if any, else a midpoint."""
    int_lo = None if lo is None else (floor(lo) + 1 if lo_strict else ceil(lo))
    int_hi = None if hi is None else (ceil(hi) - 1 if hi_strict else floor(hi))
    if int_lo is None or int_hi is None or int_lo <= int_hi:
        x = 0
        if int_lo is not None:
            x = max(x, int_lo)
        if int_hi is not None:
            x = min(x, int_hi)
        return Fraction(x)
    if lo == hi:
        return Fraction(lo)
    return (Fraction(lo) + Fraction(hi)) / 2


def eliminate(variables: Iterable[str], constraints: Sequence[LinConstraint],
              cap: int | None = None) -> tuple[LinConstraint, ...]:
    """Project ``variables`` out of a conjunction (exact over the rationals).

    An unsatisfiable input projects to the single constraint ``-1 >= 0``.
    """
    cap = cap or get_caps().fm
    try:
        rows, _ = _run(list(constraints), variables, cap)
    except _Contradiction:
        return (LinConstraint(LinTerm.const(-1), GE),)
    out = []
    for r in rows:
        if _violated(r):
            return (LinConstraint(LinTerm.const(-1), GE),)
        if r.coeffs:
            out.append(LinConstraint(LinTerm.of(r.coeffs, r.const), r.rel))
    return tuple(dict.fromkeys(out))


def bounds_of(term: LinTerm, constraints: Sequence[LinConstraint], cap: int | None = None):
    """Range of ``term`` over a conjunction: ``(lo, hi)`` with None for unbounded.

    Returns None when the conjunction is unsatisfiable. Bounds are closures
    (strictness is dropped), which is what interval abstraction needs.
    """
    probe = "__probe__"
    defining = LinConstraint(term - LinTerm.var(probe), EQ)
    others = {v for c in constraints for v in c.variables()} | term.variables()
    rows = eliminate(others, list(constraints) + [defining], cap)
    lo = hi = None
    for c in rows:
        if not c.variables():
            return None
        a = c.term.coeff(probe)
        bound = -c.term.constant / a
        if c.rel == EQ:
            return bound, bound
        if a > 0:
            lo = bound if lo is None else max(lo, bound)
        else:
            hi = bound if hi is None else min(hi, bound)
    if lo is not None and hi is not None and lo > hi:
        return None
    return lo, hi
