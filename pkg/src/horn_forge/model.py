"""Models, refutation evidence and verdicts, plus the textual model format.

Model files list one interpretation per unknown predicate and one rank per
well-founded predicate::

    inv := x >= 0 && x <= 10;
    rank round := 10 - x;                  // affine
    rank round := lex(y, x);               // lexicographic
    rank round := table [(0): 2, (1): 1];  // finite table over the first half
    inv := points [(0), (1), (2)];         // finite set of parameter tuples
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

from .errors import InputError
from .formula import (EQ, FALSE, TRUE, And, Atom, Formula, LinConstraint, LinTerm, Or, conj,
                      disj, free_vars, rename)
from .horn import HornSystem, PredicateAtom
from .program import Parser
from .wf import AffineRank, LexRank, RankWitness, TableRank

Point = tuple


# --- finite tables ----------------------------------------------------------

def table_formula(params: Sequence[str], points: Iterable[Point]) -> Formula:
    """Disjunction of point cubes ``params = point``."""
    cubes = []
    for p in sorted(set(map(tuple, points))):
        cubes.append(conj(Atom(LinConstraint(LinTerm.var(v) - LinTerm.const(x), EQ))
                          for v, x in zip(params, p)))
    return disj(cubes)


def _point_of(f: Formula, params: Sequence[str]) -> Point | None:
    parts = f.children if isinstance(f, And) else (f,)
    values = {}
    for a in parts:
        if not isinstance(a, Atom) or a.constraint.rel != EQ:
            return None
        coeffs = a.constraint.term.coeffs
        if len(coeffs) != 1 or coeffs[0][1] not in (1, -1):
            return None
        var, k = coeffs[0]
        value = -a.constraint.term.constant / k
        if var in values or value.denominator != 1:
            return None
        values[var] = int(value)
    if set(values) != set(params):
        return None
    return tuple(values[v] for v in params)


def as_table(f: Formula, params: Sequence[str]) -> frozenset[Point] | None:
    """Recognize a formula produced by :func:`table_formula`; None otherwise."""
    if f == FALSE:
        return frozenset()
    if not params:
        return frozenset({()}) if f == TRUE else None
    items = f.children if isinstance(f, Or) else (f,)
    out = set()
    for item in items:
        p = _point_of(item, params)
        if p is None:
            return None
        out.add(p)
    return frozenset(out)


# --- models -----------------------------------------------------------------

@dataclass(frozen=True)
class Model:
    interp: Mapping[str, Formula]
    ranks: Mapping[str, RankWitness] = field(default_factory=dict)

    def __getitem__(self, pred: str) -> Formula:
        return self.interp[pred]

    def instantiate(self, hs: HornSystem, atom: PredicateAtom) -> Formula:
        pred = hs.predicate(atom.pred)
        return rename(self.interp[atom.pred], dict(zip(pred.param_names, atom.args)))


# --- derivations and other refutation evidence ------------------------------

@dataclass(frozen=True)
class Derivation:
    """Ground clause instance; children derive the body atoms in order."""
    clause: int
    assignment: tuple[tuple[str, Fraction], ...]
    children: tuple[Derivation, ...] = ()

    @classmethod
    def of(cls, clause: int, assignment: Mapping[str, object], children=()) -> Derivation:
        return cls(clause, tuple(sorted((k, Fraction(v)) for k, v in assignment.items())),
                   tuple(children))

    @property
    def values(self) -> dict[str, Fraction]:
        return dict(self.assignment)

    @property
    def height(self) -> int:
        return 1 + max((c.height for c in self.children), default=-1)

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children)

    def head_fact(self, hs: HornSystem) -> tuple[str, tuple[Fraction, ...]] | None:
        head = hs.clauses[self.clause].head
        if not isinstance(head, PredicateAtom):
            return None
        vals = self.values
        return head.pred, tuple(vals.get(a) for a in head.args)


@dataclass(frozen=True)
class LassoEvidence:
    """Derivations of facts ``W(s0, s1), W(s1, s2), ..., W(sn, s0)`` of a wf predicate."""
    derivations: tuple[Derivation, ...]


@dataclass(frozen=True)
class ClosedSetEvidence:
    """A set of states no model's ``inv`` may meet, containing an initial state.

    For every state either a query clause fires, or some ``choice`` of the
    extra universals of the existential clause forces every witness back into
    the set. ``choices`` maps states to those values (an environment move).
    """
    inv: str
    states: tuple[Point, ...]
    choices: tuple[tuple[Point, Point], ...] = ()

    def choice_map(self) -> dict[Point, Point]:
        return dict(self.choices)


Evidence = Union[Derivation, LassoEvidence, ClosedSetEvidence]


@dataclass(frozen=True)
class Solved:
    model: Model
    strategy: str = ""
    status = "SOLVED"


@dataclass(frozen=True)
class Refuted:
    evidence: Evidence
    strategy: str = ""
    status = "REFUTED"

    @property
    def derivation(self) -> Derivation | None:
        return self.evidence if isinstance(self.evidence, Derivation) else None


@dataclass(frozen=True)
class Unknown:
    reason: str
    spent: tuple[tuple[str, object], ...] = ()
    status = "UNKNOWN"


Verdict = Union[Solved, Refuted, Unknown]


# --- text format -----------------------------------------------------------

def _fmt_point(p: Point) -> str:
    return "(" + ", ".join(str(x) for x in p) + ")"


def format_model(hs: HornSystem, model: Model) -> str:
    lines = []
    for pred in hs.unknowns:
        f = model.interp.get(pred.name)
        if f is None:
            continue
        table = as_table(f, pred.param_names)
        if table is not None and table and pred.params:
            body = "points [" + ", ".join(_fmt_point(p) for p in sorted(table)) + "]"
        else:
            body = str(f)
        lines.append(f"{pred.name} := {body};")
    for name, rank in model.ranks.items():
        lines.append(f"rank {name} := {rank};")
    return "\n".join(lines) + "\n"


def _tuple(p: Parser) -> Point:
    p.expect("(")
    values = []
    if not p.at(")"):
        values.append(p.integer())
        while p.accept(","):
            values.append(p.integer())
    p.expect(")")
    return tuple(values)


def _list(p: Parser, item):
    p.expect("[")
    out = []
    if not p.at("]"):
        out.append(item())
        while p.accept(","):
            out.append(item())
    p.expect("]")
    return out


def parse_model(text: str, hs: HornSystem) -> Model:
    """Parse model text against the unknowns of ``hs``."""
    p = Parser(text)
    interp: dict[str, Formula] = {}
    ranks: dict[str, RankWitness] = {}
    if p.tok.kind == "eof":
        raise InputError("empty model")
    while p.tok.kind != "eof":
        is_rank = p.accept("rank") is not None
        tok = p.ident()
        try:
            pred = hs.predicate(tok.text)
        except KeyError:
            raise InputError(f"unknown predicate {tok.text!r}", tok.line, tok.col) from None
        if pred.kind != "unknown":
            raise InputError(f"{tok.text!r} is not an unknown predicate", tok.line, tok.col)
        target = ranks if is_rank else interp
        if tok.text in target:
            raise InputError(f"{tok.text!r} defined twice", tok.line, tok.col)
        p.expect(":=")
        names = pred.param_names
        if is_rank:
            state = names[: len(names) // 2]
            target[tok.text] = _rank(p, tok, state)
        elif p.accept("points"):
            points = _list(p, lambda: _tuple(p))
            if any(len(x) != pred.arity for x in points):
                raise InputError(f"points of {pred.name} must have {pred.arity} values",
                                 tok.line, tok.col)
            target[tok.text] = table_formula(names, points)
        else:
            f = p.formula()
            _scope(free_vars(f), names, tok)
            target[tok.text] = f
        p.expect(";")
    missing = [u.name for u in hs.unknowns if u.name not in interp]
    if missing:
        raise InputError(f"model does not interpret: {', '.join(missing)}")
    return Model(interp, ranks)


def _scope(names_used: Iterable[str], allowed: Sequence[str], tok) -> None:
    stray = sorted(set(names_used) - set(allowed))
    if stray:
        raise InputError(f"{tok.text} may only mention {', '.join(allowed)}; found "
                         f"{', '.join(stray)}", tok.line, tok.col)


def _rank(p: Parser, tok, state: Sequence[str]) -> RankWitness:
    if p.accept("table"):
        def entry():
            key = _tuple(p)
            p.expect(":")
            return key, p.integer()
        entries = _list(p, entry)
        if any(len(k) != len(state) for k, _ in entries):
            raise InputError(f"table keys must have {len(state)} values", tok.line, tok.col)
        return TableRank.of(state, dict(entries))
    if p.accept("lex"):
        p.expect("(")
        parts = [p.term()]
        while p.accept(","):
            parts.append(p.term())
        p.expect(")")
        for t in parts:
            _scope(t.variables(), state, tok)
        return LexRank(tuple(AffineRank(t) for t in parts))
    t = p.term()
    _scope(t.variables(), state, tok)
    return AffineRank(t)


__all__ = [
    "ClosedSetEvidence", "Derivation", "Evidence", "LassoEvidence", "Model", "Refuted",
    "Solved", "Unknown", "Verdict", "as_table", "format_model", "parse_model", "table_formula",
]
