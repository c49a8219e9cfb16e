"""Ranking witnesses for well-founded relations.

A relation over ``(v, v')`` is well-founded when some rank maps states into a
well-order and strictly decreases along every pair. Three witness shapes are
supported: affine ranks (bounded below by 0, decrease of at least 1),
lexicographic tuples of affine ranks, and explicit finite tables for
enumerated state spaces.

Affine ranks for a conjunctive relation are synthesized exactly through the
Farkas dual: the rank coefficients and the Farkas multipliers become the
unknowns of a single linear system, decided by the library's own exact
solver.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence, Union

from .base import BaseEstimator, check_is_fitted
from .errors import InputError
from .formula import (EQ, GE, GT, Formula, LinConstraint, LinTerm, PointSolver, atom,
                      cube_formula, disj, dnf, implies, sat_cube, tighten_cube, valid)


def _primed(name: str) -> str:
    return name + "'"


def _is_primed(name: str) -> bool:
    return name.endswith("'")


@dataclass(frozen=True)
class AffineRank:
    term: LinTerm

    @classmethod
    def of(cls, coeffs: Mapping[str, object] | None = None, constant=0) -> AffineRank:
        return cls(LinTerm.of(coeffs or {}, constant))

    def at(self, primes: int = 0) -> LinTerm:
        return self.term.rename({v: v + "'" * primes for v in self.term.variables()})

    def value(self, state: Mapping[str, object]) -> Fraction:
        return self.term.evaluate(state)

    def __str__(self):
        return str(self.term)


@dataclass(frozen=True)
class LexRank:
    components: tuple[AffineRank, ...]

    def __str__(self):
        return f"lex({', '.join(str(c) for c in self.components)})"


@dataclass(frozen=True)
class TableRank:
    """Rank given pointwise on a finite set of integer states."""
    vars: tuple[str, ...]
    table: tuple[tuple[tuple[int, ...], int], ...]

    @classmethod
    def of(cls, vars_: Sequence[str], table: Mapping[tuple[int, ...], int]) -> TableRank:
        return cls(tuple(vars_), tuple(sorted((tuple(k), int(v)) for k, v in table.items())))

    def as_dict(self) -> dict[tuple[int, ...], int]:
        return dict(self.table)

    def __str__(self):
        rows = ", ".join(f"({', '.join(map(str, k))}): {v}" for k, v in self.table)
        return f"table [{rows}]"


RankWitness = Union[AffineRank, LexRank, TableRank]


# --- checking -------------------------------------------------------------

def _holds(premise: Formula, goal: Formula, int_vars, bounds) -> bool:
    return valid(implies(premise, goal), int_vars, bounds)


def _bounded(c: Formula, r: AffineRank, int_vars, bounds) -> bool:
    return _holds(c, atom(r.term, GE), int_vars, bounds)


def _drop(c: Formula, r: AffineRank, at_least: int, int_vars, bounds) -> bool:
    goal = atom(r.at(0) - r.at(1) - at_least, GE)
    return _holds(c, goal, int_vars, bounds)


def _affine_ok(c: Formula, r: AffineRank, int_vars, bounds) -> bool:
    return _bounded(c, r, int_vars, bounds) and _drop(c, r, 1, int_vars, bounds)


def _lex_ok(c: Formula, lex: LexRank, int_vars, bounds) -> bool:
    for comp in lex.components:
        if _affine_ok(c, comp, int_vars, bounds):
            return True
        if not _drop(c, comp, 0, int_vars, bounds):
            return False
    return False


def _table_ok(rel: Formula, rank: TableRank, bounds) -> bool:
    pre = list(rank.vars)
    post = [_primed(v) for v in pre]
    free = pre + post
    if bounds is None or any(v not in bounds for v in free):
        return False
    table = rank.as_dict()
    if any(value < 0 for value in table.values()):
        return False
    for point in PointSolver(rel, free, bounds).solutions():
        s, t = point[: len(pre)], point[len(pre):]
        if s not in table or t not in table or table[s] - table[t] < 1:
            return False
    return True


def check_rank(round_interp: Formula, rank: RankWitness, int_vars=frozenset(),
               bounds: Mapping[str, tuple[int, int]] | None = None) -> bool:
    """True iff ``rank`` is bounded by 0 and drops by at least 1 on every cube.

    ``int_vars`` and ``bounds`` describe the sorts of the relation's variables;
    integer reasoning (cuts, branch-and-bound) is used for those.
    """
    if isinstance(rank, TableRank):
        return _table_ok(round_interp, rank, bounds)
    for c in dnf(round_interp):
        f = cube_formula(c)
        ok = (_affine_ok(f, rank, int_vars, bounds) if isinstance(rank, AffineRank)
              else _lex_ok(f, rank, int_vars, bounds))
        if not ok:
            return False
    return True


# --- synthesis ------------------------------------------------------------

def _state_vars(constraints: Sequence[LinConstraint], given: Sequence[str] | None) -> list[str]:
    if given is not None:
        return list(given)
    names = set()
    for c in constraints:
        for v in c.variables():
            names.add(v.rstrip("'"))
    return sorted(names)


def _cube_of(rel) -> tuple[LinConstraint, ...]:
    if isinstance(rel, Formula):
        cubes = dnf(rel)
        if len(cubes) != 1:
            raise InputError("relation is disjunctive; use lex_synthesize")
        return tuple(cubes[0])
    return tuple(rel)


class _Dual:
    """Linear constraints over rank coefficients plus Farkas multipliers."""

    def __init__(self, state: list[str]):
        self.state = state
        self.rows: list[LinConstraint] = []
        self.fresh = 0
        self.coef = {v: LinTerm.var(f"#a.{v}") for v in state}
        self.const = LinTerm.var("#a.0")

    def _mult(self, nonneg: bool) -> LinTerm:
        self.fresh += 1
        var = LinTerm.var(f"#l{self.fresh}")
        if nonneg:
            self.rows.append(LinConstraint(var, GE))
        return var

    def entails(self, rel: Sequence[LinConstraint], target: dict[str, LinTerm],
                target_const: LinTerm):
        """Encode: on rel, sum(target[x] * x) + target_const >= 0 (affine Farkas)."""
        lhs: dict[str, LinTerm] = {}
        lhs_const = self._mult(True)  # slack multiplier for the constant
        for c in rel:
            lam = self._mult(c.rel != EQ)
            for v, k in c.term.coeffs:
                lhs[v] = lhs.get(v, LinTerm.const(0)) + lam.scale(k)
            lhs_const = lhs_const + lam.scale(c.term.constant)
        for v in set(lhs) | set(target):
            diff = target.get(v, LinTerm.const(0)) - lhs.get(v, LinTerm.const(0))
            self.rows.append(LinConstraint(diff, EQ))
        self.rows.append(LinConstraint(target_const - lhs_const, EQ))

    def bounded(self, rel):
        self.entails(rel, dict(self.coef), self.const)

    def decrease(self, rel, by: int):
        target = {}
        for v in self.state:
            target[v] = self.coef[v]
            target[_primed(v)] = -self.coef[v]
        self.entails(rel, target, LinTerm.const(-by))

    def solve(self) -> AffineRank | None:
        res = sat_cube(self.rows)
        if not res:
            return None
        value = res.assignment
        coeffs = {v: value.get(f"#a.{v}", 0) for v in self.state}
        return AffineRank(LinTerm.of(coeffs, value.get("#a.0", 0)))


def _closure(rel: Sequence[LinConstraint], int_vars) -> tuple[LinConstraint, ...]:
    rel = tighten_cube(rel, int_vars) if int_vars else tuple(rel)
    return tuple(LinConstraint(c.term, GE) if c.rel == GT else c for c in rel)


def pr_synthesize(rel, vars: Sequence[str] | None = None, int_vars=frozenset()
                  ) -> AffineRank | None:
    """Complete affine rank synthesis for one conjunctive relation over ``(v, v')``.

    Strict constraints are first tightened over ``int_vars`` and then replaced
    by their closure, so the result is also valid for the original relation.
    """
    cube = _cube_of(rel)
    if not sat_cube(cube):
        return AffineRank(LinTerm.const(0))
    closed = _closure(cube, frozenset(int_vars))
    dual = _Dual(_state_vars(cube, vars))
    dual.bounded(closed)
    dual.decrease(closed, 1)
    rank = dual.solve()
    if rank is not None and not check_rank(cube_formula(cube), rank, frozenset(int_vars)):
        return None
    return rank


def lex_synthesize(disjuncts, vars: Sequence[str] | None = None, int_vars=frozenset()
                   ) -> LexRank | None:
    """Greedy lexicographic composition of affine ranks over a list of cubes."""
    cubes = [_cube_of(d) for d in disjuncts]
    cubes = [c for c in cubes if sat_cube(c)]
    state = _state_vars([c for cube in cubes for c in cube], vars)
    int_vars = frozenset(int_vars)
    remaining = list(cubes)
    components: list[AffineRank] = []
    while remaining:
        found = None
        for target in remaining:
            dual = _Dual(state)
            dual.bounded(_closure(target, int_vars))
            dual.decrease(_closure(target, int_vars), 1)
            for other in remaining:
                if other is not target:
                    dual.decrease(_closure(other, int_vars), 0)
            found = dual.solve()
            if found is not None:
                break
        if found is None:
            return None
        components.append(found)
        keep = [c for c in remaining
                if not _affine_ok(cube_formula(c), found, int_vars, None)]
        if len(keep) == len(remaining):
            return None
        remaining = keep
    lex = LexRank(tuple(components))
    whole = disj(cube_formula(c) for c in cubes)
    return lex if check_rank(whole, lex, int_vars) else None


def synthesize(rel: Formula, vars: Sequence[str] | None = None, int_vars=frozenset()
               ) -> RankWitness | None:
    """Affine rank if one exists for a single-cube relation, else lexicographic."""
    cubes = [c for c in dnf(rel) if sat_cube(c)]
    if not cubes:
        return AffineRank(LinTerm.const(0))
    if len(cubes) == 1:
        rank = pr_synthesize(cubes[0], vars, int_vars)
        if rank is not None:
            return rank
    lex = lex_synthesize(cubes, vars, int_vars)
    if lex is not None and len(lex.components) == 1:
        return lex.components[0]
    return lex


class RankingSynthesizer(BaseEstimator):
    """Estimator wrapper: ``fit(relation)`` leaves the witness in ``rank_``."""

    def __init__(self, vars=None, int_vars=()):
        self.vars = vars
        self.int_vars = int_vars

    def fit(self, rel, y=None):
        if isinstance(rel, (list, tuple)) and rel and not isinstance(rel[0], LinConstraint):
            self.rank_ = lex_synthesize(rel, self.vars, frozenset(self.int_vars))
        else:
            formula = rel if isinstance(rel, Formula) else cube_formula(tuple(rel))
            self.rank_ = synthesize(formula, self.vars, frozenset(self.int_vars))
        self.relation_ = rel
        return self

    def predict(self, states):
        """Rank values of ``states`` (mappings from variable to value)."""
        check_is_fitted(self)
        if self.rank_ is None:
            raise InputError("no ranking function was found")
        return [_evaluate(self.rank_, s) for s in states]


def _evaluate(rank: RankWitness, state: Mapping[str, object]):
    if isinstance(rank, AffineRank):
        return rank.value(state)
    if isinstance(rank, LexRank):
        return tuple(c.value(state) for c in rank.components)
    return rank.as_dict()[tuple(int(state[v]) for v in rank.vars)]


__all__ = [
    "AffineRank", "LexRank", "RankWitness", "RankingSynthesizer", "TableRank", "check_rank",
    "lex_synthesize", "pr_synthesize", "synthesize",
]
