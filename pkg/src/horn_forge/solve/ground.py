"""Bottom-up ground fixpoint over bounded integer clause variables.

Facts are derived level by level (semi-naive): a level-``h`` fact uses at
least one level-``h-1`` fact, so the first derivation recorded for a fact has
minimal height. Query clauses produce refutations.
"""
from __future__ import annotations

from fractions import Fraction

from ..caps import get_caps
from ..errors import ResourceError, UnsupportedFragment
from ..formula import PointSolver
from ..horn import FalseHead, HornSystem
from ..model import Derivation
from .budget import Deadline, unlimited


def clause_bounds(clause):
    out = {}
    for v in clause.universals:
        if not v.is_int or v.bounds is None:
            return None
        out[v.name] = v.bounds
    return out


def is_ground_solvable(hs: HornSystem) -> bool:
    return not hs.has_exists and all(clause_bounds(c) is not None for c in hs.clauses)


class GroundEngine:
    def __init__(self, hs: HornSystem, deadline: Deadline | None = None):
        if not is_ground_solvable(hs):
            raise UnsupportedFragment("ground fixpoint needs bounded integer variables and no "
                                      "existential heads")
        self.hs = hs
        self.deadline = deadline or unlimited()
        self.cap = get_caps().facts
        self.solvers = []
        for c in hs.clauses:
            names = [v.name for v in c.universals]
            self.solvers.append((names, PointSolver(c.constraint, names, clause_bounds(c))))
        self.facts: dict[str, dict[tuple, Derivation]] = {p.name: {} for p in hs.predicates}
        self.by_height: dict[str, list[list[tuple]]] = {p.name: [] for p in hs.predicates}
        self.level = -1
        self.complete = False
        self.refutation: Derivation | None = None

    # -- helpers ---------------------------------------------------------
    def _pool(self, pred: str, lo: int, hi: int):
        levels = self.by_height[pred]
        for h in range(max(lo, 0), min(hi, len(levels) - 1) + 1):
            yield from levels[h]

    def _bindings(self, atoms, pools, i, partial, chosen):
        if i == len(atoms):
            yield dict(partial), list(chosen)
            return
        atom = atoms[i]
        for fact in pools[i]():
            ext = partial
            added = []
            ok = True
            for x, val in zip(atom.args, fact):
                have = ext.get(x)
                if have is None:
                    ext[x] = val
                    added.append(x)
                elif have != val:
                    ok = False
                    break
            if ok:
                chosen.append((atom.pred, fact))
                yield from self._bindings(atoms, pools, i + 1, ext, chosen)
                chosen.pop()
            for x in added:
                del ext[x]

    def _fire(self, index: int, fixed: dict, chosen, new_level: list):
        clause = self.hs.clauses[index]
        names, solver = self.solvers[index]
        for point in solver.solutions(fixed):
            values = dict(zip(names, point))
            children = tuple(self.facts[p][f] for p, f in chosen)
            if isinstance(clause.head, FalseHead):
                self.refutation = Derivation.of(index, values, children)
                return True
            head = clause.head
            fact = tuple(values[a] for a in head.args)
            table = self.facts[head.pred]
            if fact not in table:
                if len(table) >= self.cap:
                    raise ResourceError(f"more than {self.cap} ground facts for {head.pred}")
                table[fact] = Derivation.of(index, values, children)
                new_level.append((head.pred, fact))
        return False

    # -- main loop -------------------------------------------------------
    def step(self) -> bool:
        """Compute the next level; returns False once nothing new appears."""
        h = self.level + 1
        new: list[tuple[str, tuple]] = []
        for index, clause in enumerate(self.hs.clauses):
            self.deadline.check()
            atoms = clause.body
            if h == 0:
                if not atoms and self._fire(index, {}, [], new):
                    break
                continue
            if not atoms:
                continue
            for i in range(len(atoms)):
                pools = []
                for j, a in enumerate(atoms):
                    if j < i:
                        pools.append(lambda a=a: self._pool(a.pred, 0, h - 2))
                    elif j == i:
                        pools.append(lambda a=a: self._pool(a.pred, h - 1, h - 1))
                    else:
                        pools.append(lambda a=a: self._pool(a.pred, 0, h - 1))
                for fixed, chosen in self._bindings(atoms, pools, 0, {}, []):
                    if self._fire(index, fixed, chosen, new):
                        break
                if self.refutation is not None:
                    break
            if self.refutation is not None:
                break
        self.level = h
        for pred in self.by_height:
            self.by_height[pred].append([])
        for pred, fact in sorted(new):
            self.by_height[pred][h].append(fact)
        if not new and self.refutation is None:
            self.complete = True
        return bool(new)

    def run(self, max_height: int | None = None) -> Derivation | None:
        while self.refutation is None and not self.complete:
            if max_height is not None and self.level >= max_height:
                break
            self.step()
        return self.refutation

    def least_model(self) -> dict[str, set[tuple]]:
        return {p: set(t) for p, t in self.facts.items()}


def as_ints(values) -> tuple[int, ...]:
    return tuple(int(Fraction(v)) for v in values)
