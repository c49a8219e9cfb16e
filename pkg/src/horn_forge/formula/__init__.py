"""Exact linear arithmetic: terms, NNF formulas, satisfiability, projection."""
from __future__ import annotations

from typing import Mapping

from .core import (EQ, FALSE, GE, GT, TRUE, And, Atom, Bottom, Cmp, Cube, Formula, LinConstraint,
                   LinTerm, Not, Or, RawAnd, RawOr, Rational, Top, atom, compare, conj,
                   cube, cube_formula, disj, dnf, evaluate, free_vars, implies, negate, nnf,
                   normalize_cube, rename, substitute)
from .fm import FarkasCertificate, Sat, Unsat, bounds_of, eliminate, sat_cube
from .integer import (PointSolver, bound_constraints, box_size, int_sat, sat_mixed, tighten,
                      tighten_cube)

Assignment = dict


def sat(f: Formula, int_vars=frozenset(), bounds: Mapping[str, tuple[int, int]] | None = None
        ) -> Sat | Unsat:
    """Satisfiability of an arbitrary NNF formula via its DNF cubes."""
    for c in dnf(f):
        res = sat_mixed(c, int_vars, bounds) if int_vars or bounds else sat_cube(c)
        if res:
            return res
    return Unsat()


def valid(f: Formula, int_vars=frozenset(), bounds=None) -> bool:
    return not sat(negate(f), int_vars, bounds)


def counterexample(f: Formula, int_vars=frozenset(), bounds=None) -> dict | None:
    """An assignment falsifying ``f``, or None when ``f`` is valid."""
    res = sat(negate(f), int_vars, bounds)
    return res.assignment if res else None


__all__ = [
    "EQ", "FALSE", "GE", "GT", "TRUE", "And", "Assignment", "Atom", "Bottom", "Cmp", "Cube",
    "FarkasCertificate", "Formula", "LinConstraint", "LinTerm", "Not", "Or", "PointSolver",
    "RawAnd", "RawOr", "Rational", "Sat", "Top", "Unsat", "atom", "bound_constraints",
    "bounds_of", "box_size", "compare", "conj", "counterexample", "cube", "cube_formula",
    "disj", "dnf", "eliminate", "evaluate", "free_vars", "implies", "int_sat", "negate", "nnf",
    "normalize_cube", "rename", "sat", "sat_cube", "sat_mixed", "substitute", "tighten",
    "tighten_cube", "valid",
]
