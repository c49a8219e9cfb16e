"""Grid search over conjunctive linear templates.

Every unknown is instantiated with a conjunction of at most ``m`` inequalities
``c . x + d >= 0`` whose coefficients come from a small grid. Candidates are
visited in a fixed lexicographic order and the first one that certifies wins.
Ground clause instances that refuted earlier candidates are kept as samples:
any model must satisfy them, so a candidate violating one is skipped without
a symbolic check.
"""
from __future__ import annotations

import itertools
from typing import Mapping

from ..formula import GE, TRUE, Formula, LinTerm, atom, conj, evaluate
from ..horn import FalseHead, HornSystem, PredicateAtom
from ..model import Model
from .budget import Budget, Deadline, unlimited

#: Above this many raw grid atoms per unknown the search is skipped.
MAX_ATOMS = 5000


def grid_atoms(params, grid, const_range) -> list[Formula]:
    seen: dict[Formula, None] = {}
    for coeffs in itertools.product(sorted(grid), repeat=len(params)):
        for d in range(-const_range, const_range + 1):
            f = atom(LinTerm.of(dict(zip(params, coeffs)), d), GE)
            seen.setdefault(f)
    return list(seen)


class _Candidates:
    """Conjunctions of up to ``m`` atoms: size 0, then 1, then pairs, ..."""

    def __init__(self, atoms: list[Formula], m: int):
        self.atoms = atoms
        self.m = m

    def __iter__(self):
        yield ()
        for size in range(1, self.m + 1):
            yield from itertools.combinations(range(len(self.atoms)), size)


def farkas_templates(hs: HornSystem, budget: Budget | None = None,
                     deadline: Deadline | None = None,
                     must: Mapping[str, set] | None = None,
                     check=None) -> Model | None:
    """First grid model in lexicographic order that ``check`` certifies, or None.

    ``check`` defaults to full certification of the candidate against ``hs``.

    ``must`` lists ground facts every model contains (used to discard atoms
    early); ``check(model)`` returns ``(ok, failing_instances)`` where the
    failing instances are ``(clause index, assignment)`` pairs.
    """
    budget = budget or Budget()
    deadline = deadline or unlimited()
    if hs.has_exists:
        return None
    if check is None:
        from ..certify import certify_model

        def check(model):
            return certify_model(hs, model)
    preds = list(hs.unknowns)
    lists = []
    atoms_of = {}
    for p in preds:
        raw = len(set(budget.grid)) ** p.arity * (2 * budget.const_range + 1)
        if raw > MAX_ATOMS:
            return None
        atoms = grid_atoms(p.param_names, budget.grid, budget.const_range)
        facts = (must or {}).get(p.name, ())
        if facts:
            names = p.param_names
            atoms = [a for a in atoms
                     if all(evaluate(a, dict(zip(names, f))) for f in facts)]
        atoms_of[p.name] = atoms
        lists.append(_Candidates(atoms, budget.template_size))

    samples: list[tuple[int, dict]] = []
    cache: dict = {}

    def holds(pred: str, combo, point) -> bool:
        for k in combo:
            key = (pred, k, point)
            v = cache.get(key)
            if v is None:
                names = hs.predicate(pred).param_names
                v = cache[key] = evaluate(atoms_of[pred][k], dict(zip(names, point)))
            if not v:
                return False
        return True

    def violates(choice: dict, index: int, values: dict) -> bool:
        clause = hs.clauses[index]
        for a in clause.body:
            if not holds(a.pred, choice[a.pred], tuple(values[x] for x in a.args)):
                return False
        head = clause.head
        if isinstance(head, FalseHead):
            return True
        if isinstance(head, PredicateAtom):
            return not holds(head.pred, choice[head.pred], tuple(values[x] for x in head.args))
        return False

    visited = 0
    for combo in itertools.product(*lists):
        visited += 1
        if visited > budget.max_templates:
            return None
        if visited % 256 == 0:
            deadline.check()
        choice = {p.name: c for p, c in zip(preds, combo)}
        if any(violates(choice, i, v) for i, v in samples):
            continue
        model = Model({p.name: conj([atoms_of[p.name][k] for k in c]) if c else TRUE
                       for p, c in zip(preds, combo)})
        ok, failures = check(model)
        if ok:
            return model
        if not failures:
            continue
        samples.extend(failures)
    return None
