"""Interval abstract interpretation of Horn clauses (Kleene iteration)."""
from __future__ import annotations

from fractions import Fraction
from math import ceil, floor

from ..errors import UnsupportedFragment
from ..formula import (FALSE, GE, LinConstraint, LinTerm, bound_constraints, bounds_of, conj,
                       atom, dnf, sat_cube, tighten_cube)
from ..horn import FalseHead, HornSystem
from ..model import Model
from .budget import Budget, Deadline, unlimited

Interval = tuple  # (lo | None, hi | None)
Box = list  # one Interval per parameter; None as a whole means bottom


def _interval_rows(box: Box, args) -> list[LinConstraint]:
    rows = []
    for (lo, hi), a in zip(box, args):
        if lo is not None:
            rows.append(LinConstraint(LinTerm.var(a) - lo, GE))
        if hi is not None:
            rows.append(LinConstraint(LinTerm.const(hi) - LinTerm.var(a), GE))
    return rows


def _join(a: Box | None, b: Box | None) -> Box | None:
    if a is None:
        return b
    if b is None:
        return a
    out = []
    for (l1, h1), (l2, h2) in zip(a, b):
        lo = None if l1 is None or l2 is None else min(l1, l2)
        hi = None if h1 is None or h2 is None else max(h1, h2)
        out.append((lo, hi))
    return out


def _meet(a: Box | None, b: Box | None) -> Box | None:
    if a is None or b is None:
        return None
    out = []
    for (l1, h1), (l2, h2) in zip(a, b):
        lo = l2 if l1 is None else l1 if l2 is None else max(l1, l2)
        hi = h2 if h1 is None else h1 if h2 is None else min(h1, h2)
        if lo is not None and hi is not None and lo > hi:
            return None
        out.append((lo, hi))
    return out


class _Analysis:
    def __init__(self, hs: HornSystem, deadline: Deadline):
        if hs.has_exists:
            raise UnsupportedFragment("intervals do not handle existential heads")
        self.hs = hs
        self.deadline = deadline
        self.env: dict[str, Box | None] = {p.name: None for p in hs.unknowns}
        self.cubes = [dnf(c.constraint) for c in hs.clauses]

    def post(self, index: int) -> Box | None:
        clause = self.hs.clauses[index]
        base = bound_constraints(clause.bounds())
        for a in clause.body:
            box = self.env.get(a.pred)
            if box is None:
                return None
            base += _interval_rows(box, a.args)
        ints = clause.int_vars()
        out = None
        for cube in self.cubes[index]:
            self.deadline.check()
            rows = tighten_cube(list(cube) + base, ints)
            if not sat_cube(rows):
                continue
            box = []
            for arg in clause.head.args:
                rng = bounds_of(LinTerm.var(arg), rows)
                if rng is None:
                    box = None
                    break
                lo, hi = rng
                if arg in ints:
                    lo = None if lo is None else Fraction(ceil(lo))
                    hi = None if hi is None else Fraction(floor(hi))
                box.append((lo, hi))
            out = _join(out, box)
        return out

    def run(self, budget: Budget) -> None:
        grow: dict[tuple, int] = {}
        defining = [(i, c) for i, c in enumerate(self.hs.clauses)
                    if not isinstance(c.head, FalseHead)]
        for _ in range(budget.iterations):
            changed = False
            for index, clause in defining:
                pred = clause.head.pred
                old = self.env[pred]
                new = _join(old, self.post(index))
                if new == old:
                    continue
                if old is not None:
                    widened = []
                    for k, ((l0, h0), (l1, h1)) in enumerate(zip(old, new)):
                        if l1 != l0:
                            grow[pred, k, "lo"] = grow.get((pred, k, "lo"), 0) + 1
                            if grow[pred, k, "lo"] > budget.widening_delay:
                                l1 = None
                        if h1 != h0:
                            grow[pred, k, "hi"] = grow.get((pred, k, "hi"), 0) + 1
                            if grow[pred, k, "hi"] > budget.widening_delay:
                                h1 = None
                        widened.append((l1, h1))
                    new = widened
                self.env[pred] = new
                changed = True
            if not changed:
                break
        else:
            return
        self.narrow(defining)

    def narrow(self, defining) -> None:
        fresh: dict[str, Box | None] = {p: None for p in self.env}
        for index, clause in defining:
            fresh[clause.head.pred] = _join(fresh[clause.head.pred], self.post(index))
        for pred in self.env:
            self.env[pred] = _meet(self.env[pred], fresh[pred])

    def model(self) -> Model:
        interp = {}
        for p in self.hs.unknowns:
            box = self.env[p.name]
            if box is None:
                interp[p.name] = FALSE
                continue
            parts = []
            for (lo, hi), name in zip(box, p.param_names):
                if lo is not None:
                    parts.append(atom(LinTerm.var(name) - lo, GE))
                if hi is not None:
                    parts.append(atom(LinTerm.const(hi) - LinTerm.var(name), GE))
            interp[p.name] = conj(parts)
        return Model(interp)


def kleene_intervals(hs: HornSystem, budget: Budget | None = None,
                     deadline: Deadline | None = None) -> Model | None:
    """Interval model of ``hs``, or None when the intervals are not inductive or safe."""
    from ..certify import model_holds

    analysis = _Analysis(hs, deadline or unlimited())
    analysis.run(budget or Budget())
    model = analysis.model()
    return model if model_holds(hs, model) else None
