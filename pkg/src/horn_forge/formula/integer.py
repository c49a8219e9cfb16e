"""Integer reasoning on top of the rational kernel."""
from __future__ import annotations

import itertools
from fractions import Fraction
from math import ceil, floor, gcd, prod
from typing import Iterable, Iterator, Mapping, Sequence

from ..caps import get_caps
from ..errors import ResourceError
from .core import EQ, GE, GT, Formula, LinConstraint, LinTerm, dnf
from .fm import Sat, Unsat, sat_cube

Bounds = Mapping[str, tuple[int, int]]


def tighten(c: LinConstraint, int_vars: frozenset[str] | set[str]) -> LinConstraint:
    """Integer tightening of a constraint whose variables are all integer-sorted.

    Coefficients are already coprime integers after canonical scaling, so only
    the constant needs rounding: ``t > 0`` becomes ``t - 1 >= 0`` and
    ``a.x + c >= 0`` with ``g = gcd(a)`` becomes ``a/g.x + floor(c/g) >= 0``.
    """
    if not c.variables() or not c.variables() <= int_vars:
        return c
    term = c.term
    if any(coef.denominator != 1 for _, coef in term.coeffs):  # pragma: no cover - canonical form
        return c
    g = 0
    for _, coef in term.coeffs:
        g = gcd(g, int(coef))
    const = term.constant
    if c.rel == EQ:
        if (const / g).denominator != 1:
            return LinConstraint(LinTerm.const(-1), GE)
        return c
    if c.rel == GT:
        const = Fraction(ceil(const) - 1)  # t > 0 on integers with integer coeffs
    scaled = LinTerm(tuple((v, coef / g) for v, coef in term.coeffs), Fraction(floor(const / g)))
    return LinConstraint(scaled, GE)


def tighten_cube(constraints: Iterable[LinConstraint], int_vars) -> tuple[LinConstraint, ...]:
    int_vars = frozenset(int_vars)
    return tuple(dict.fromkeys(tighten(c, int_vars) for c in constraints))


def bound_constraints(bounds: Bounds) -> list[LinConstraint]:
    out = []
    for v, (lo, hi) in sorted(bounds.items()):
        out.append(LinConstraint(LinTerm.var(v) - lo, GE))
        out.append(LinConstraint(LinTerm.const(hi) - LinTerm.var(v), GE))
    return out


def box_size(bounds: Bounds) -> int:
    return prod(max(0, hi - lo + 1) for lo, hi in bounds.values())


def sat_mixed(constraints: Sequence[LinConstraint], int_vars=frozenset(),
              bounds: Bounds | None = None) -> Sat | Unsat:
    """Satisfiability where ``int_vars`` range over integers (within ``bounds`` if given).

    Rational relaxation after tightening, then branch-and-bound on fractional
    integer variables. With integer variables present the ``Unsat`` result
    carries no certificate (cuts are not Farkas combinations).
    """
    caps = get_caps()
    int_vars = frozenset(int_vars)
    bounds = dict(bounds or {})
    cube = list(constraints) + bound_constraints(bounds)
    if not int_vars:
        return sat_cube(cube)
    cube = list(tighten_cube(cube, int_vars))
    mentioned = {v for c in cube for v in c.variables()}
    relevant_ints = int_vars & mentioned
    if relevant_ints and relevant_ints <= bounds.keys():
        size = box_size({v: bounds[v] for v in relevant_ints})
        if size <= caps.scan and mentioned <= int_vars:
            return _scan(cube, {v: bounds[v] for v in sorted(relevant_ints)})
    nodes = 0
    stack = [cube]
    while stack:
        current = stack.pop()
        nodes += 1
        if nodes > caps.bb:
            raise ResourceError(f"branch-and-bound exceeded {caps.bb} nodes")
        res = sat_cube(current)
        if not res:
            continue
        frac = [v for v in sorted(relevant_ints) if res.assignment[v].denominator != 1]
        if not frac:
            return res
        v = frac[0]
        val = res.assignment[v]
        down = LinConstraint(LinTerm.const(floor(val)) - LinTerm.var(v), GE)
        up = LinConstraint(LinTerm.var(v) - ceil(val), GE)
        stack.append(list(tighten_cube(current + [up], int_vars)))
        stack.append(list(tighten_cube(current + [down], int_vars)))
    return Unsat(None)


def _scan(cube: list[LinConstraint], bounds: Bounds) -> Sat | Unsat:
    relax = sat_cube(cube)
    if not relax:
        return relax
    if all(relax.assignment.get(v, Fraction(0)).denominator == 1 for v in bounds):
        return relax
    names = list(bounds)
    for point in itertools.product(*(range(lo, hi + 1) for lo, hi in bounds.values())):
        assignment = {v: Fraction(x) for v, x in zip(names, point)}
        if all(c.holds(assignment) for c in cube):
            return Sat(assignment)
    return Unsat(None)


def int_sat(constraints: Sequence[LinConstraint], bounds: Bounds) -> Sat | Unsat:
    """Integer satisfiability inside a box; every variable must be bounded."""
    mentioned = {v for c in constraints for v in c.variables()}
    missing = mentioned - bounds.keys()
    if missing:
        raise ValueError(f"int_sat needs bounds for {sorted(missing)}")
    caps = get_caps()
    relevant = {v: bounds[v] for v in sorted(mentioned)}
    try:
        return sat_mixed(constraints, frozenset(relevant), relevant)
    except ResourceError:
        if box_size(relevant) > caps.box:
            raise
    return _scan(list(tighten_cube(list(constraints) + bound_constraints(relevant), relevant)),
                 relevant)


class PointSolver:
    """Enumerate integer points of a formula inside a box, given some fixed values.

    The formula is converted to DNF once; each query substitutes the fixed
    values and backtracks over the free variables with bound propagation.
    """

    def __init__(self, formula: Formula, free: Sequence[str], bounds: Bounds):
        self.free = list(free)
        self.bounds = {v: bounds[v] for v in self.free}
        self.cubes = dnf(formula)

    def solutions(self, fixed: Mapping[str, int] | None = None, limit: int | None = None
                  ) -> list[tuple[int, ...]]:
        """Sorted points (over ``free``, fixed values included) of the formula."""
        fixed = dict(fixed or {})
        order = [v for v in self.free if v not in fixed]
        found: dict[tuple[int, ...], None] = {}
        for cube in self.cubes:
            rows = []
            dead = False
            for c in cube:
                t = c.term.substitute(fixed) if fixed else c.term
                if t.is_constant:
                    if not _rel_ok(t.constant, c.rel):
                        dead = True
                        break
                    continue
                rows.append((t, c.rel))
            if dead:
                continue
            for partial in self._search(rows, order, 0, {}):
                point = tuple(partial[v] if v in partial else fixed[v] for v in self.free)
                found.setdefault(point)
                if limit is not None and len(found) >= limit:
                    return sorted(found)
        return sorted(found)

    def exists(self, fixed: Mapping[str, int] | None = None) -> bool:
        return bool(self.solutions(fixed, limit=1))

    def _search(self, rows, order, depth, partial) -> Iterator[dict[str, int]]:
        if depth == len(order):
            if all(_rel_ok(t.evaluate(partial), rel) for t, rel in rows):
                yield partial
            return
        v = order[depth]
        lo, hi = self.bounds[v]
        later = set(order[depth + 1:])
        for t, rel in rows:
            a = t.coeff(v)
            if a == 0 or t.variables() & later:
                continue
            rest = t.constant + sum(c * partial[w] for w, c in t.coeffs if w != v)
            bound = -rest / a
            if rel == EQ:
                if bound.denominator != 1:
                    return
                lo, hi = max(lo, int(bound)), min(hi, int(bound))
            elif a > 0:
                b = floor(bound) + 1 if rel == GT else ceil(bound)
                lo = max(lo, b)
            else:
                b = ceil(bound) - 1 if rel == GT else floor(bound)
                hi = min(hi, b)
            if lo > hi:
                return
        for x in range(lo, hi + 1):
            partial[v] = x
            yield from self._search(rows, order, depth + 1, partial)
        partial.pop(v, None)


def _rel_ok(value, rel) -> bool:
    if rel == GE:
        return value >= 0
    if rel == GT:
        return value > 0
    return value == 0
