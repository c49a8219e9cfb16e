"""Bounded unrolling: search for derivations of ``false`` up to a height.

Bounded integer systems are unrolled over ground facts. Everything else is
unrolled symbolically: each fact is a cube over the predicate parameters
(projected exactly over the rationals) remembering how it was produced, and
a satisfiable query is turned into a ground tree by top-down reconstruction.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..caps import get_caps
from ..errors import ResourceError, UnsupportedFragment
from ..formula import (EQ, LinConstraint, LinTerm, dnf, eliminate, normalize_cube, sat_cube,
                       sat_mixed)
from ..horn import FalseHead, HornSystem
from ..model import Derivation
from .budget import Deadline, unlimited
from .ground import GroundEngine, is_ground_solvable


@dataclass(frozen=True)
class SymFact:
    pred: str
    cube: tuple  # over the predicate's parameter names
    clause: int
    local: tuple  # constraint cube of the clause used
    children: tuple
    height: int


def _param(i: int) -> str:
    return f"#p{i}"


class SymbolicUnroller:
    def __init__(self, hs: HornSystem, deadline: Deadline | None = None):
        if hs.has_exists:
            raise UnsupportedFragment("unrolling does not handle existential heads")
        self.hs = hs
        self.deadline = deadline or unlimited()
        self.cap = get_caps().unroll
        self.facts: dict[str, list[SymFact]] = {p.name: [] for p in self.hs.predicates}
        self.seen: set = set()
        self.cubes = [dnf(c.constraint) for c in hs.clauses]
        self.level = -1
        self.complete = False
        self.refutation: Derivation | None = None
        self.count = 0

    def _link(self, clause, children) -> list:
        rows = []
        for j, (atom, child) in enumerate(zip(clause.body, children)):
            mapping = {_param(i): f"#b{j}.{i}" for i in range(len(atom.args))}
            rows += [c.rename(mapping) for c in child.cube]
            for i, arg in enumerate(atom.args):
                rows.append(LinConstraint(LinTerm.var(f"#b{j}.{i}") - LinTerm.var(arg), EQ))
        return rows

    def _combine(self, index: int, children, h: int, new: list) -> None:
        clause = self.hs.clauses[index]
        link = self._link(clause, children)
        for local in self.cubes[index]:
            rows = list(local) + link
            if isinstance(clause.head, FalseHead):
                if sat_cube(rows):
                    d = self._rebuild(SymFact("", (), index, tuple(local), tuple(children), h), ())
                    if d is not None:
                        self.refutation = d
                        return
                continue
            head = clause.head
            rows += [LinConstraint(LinTerm.var(_param(i)) - LinTerm.var(a), EQ)
                     for i, a in enumerate(head.args)]
            keep = {_param(i) for i in range(len(head.args))}
            gone = {v for c in rows for v in c.variables()} - keep
            projected = normalize_cube(eliminate(gone, rows))
            if not sat_cube(projected):
                continue
            key = (head.pred, projected)
            if key in self.seen:
                continue
            self.seen.add(key)
            self.count += 1
            if self.count > self.cap:
                raise ResourceError(f"more than {self.cap} symbolic facts")
            new.append(SymFact(head.pred, projected, index, tuple(local), tuple(children), h))

    def _rebuild(self, fact: SymFact, head_values) -> Derivation | None:
        clause = self.hs.clauses[fact.clause]
        rows = list(fact.local) + self._link(clause, fact.children)
        if not isinstance(clause.head, FalseHead):
            rows += [LinConstraint(LinTerm.var(a) - LinTerm.const(v), EQ)
                     for a, v in zip(clause.head.args, head_values)]
        ints = clause.int_vars()
        res = sat_mixed(rows, ints, clause.bounds()) if ints else sat_cube(rows)
        if not res:
            return None
        values = {v.name: res.assignment.get(v.name, 0) for v in clause.universals}
        for v in clause.universals:
            if v.bounds is not None and not v.bounds[0] <= values[v.name] <= v.bounds[1]:
                return None
        kids = []
        for atom, child in zip(clause.body, fact.children):
            d = self._rebuild(child, tuple(values[a] for a in atom.args))
            if d is None:
                return None
            kids.append(d)
        return Derivation.of(fact.clause, values, kids)

    def step(self) -> bool:
        h = self.level + 1
        new: list[SymFact] = []
        for index, clause in enumerate(self.hs.clauses):
            self.deadline.check()
            atoms = clause.body
            if (h == 0) != (not atoms):
                continue
            if not atoms:
                self._combine(index, (), 0, new)
            else:
                for combo in self._combos(atoms, h):
                    self._combine(index, combo, h, new)
                    if self.refutation is not None:
                        break
            if self.refutation is not None:
                break
        for f in new:
            self.facts[f.pred].append(f)
        self.level = h
        if not new and self.refutation is None:
            self.complete = True
        return bool(new)

    def _combos(self, atoms, h):
        def rec(i, acc, fresh):
            if i == len(atoms):
                if fresh:
                    yield tuple(acc)
                return
            for f in self.facts[atoms[i].pred]:
                if f.height <= h - 1:
                    acc.append(f)
                    yield from rec(i + 1, acc, fresh or f.height == h - 1)
                    acc.pop()
        return rec(0, [], False)

    def run(self, max_height: int | None = None) -> Derivation | None:
        while self.refutation is None and not self.complete:
            if max_height is not None and self.level >= max_height:
                break
            self.step()
        return self.refutation


def make_unroller(hs: HornSystem, deadline: Deadline | None = None):
    return GroundEngine(hs, deadline) if is_ground_solvable(hs) else SymbolicUnroller(hs, deadline)


def bmc(hs: HornSystem, k: int, deadline: Deadline | None = None) -> Derivation | None:
    """A derivation of ``false`` of height at most ``k``, or None.

    Resource exhaustion also yields None; the search is exhaustive otherwise,
    so a derivation found at depth ``k`` is found at every larger depth.
    """
    try:
        return make_unroller(hs, deadline).run(k)
    except ResourceError:
        return None
