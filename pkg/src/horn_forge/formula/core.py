"""Linear terms, constraints and negation-normal-form formulas over exact rationals."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Iterable, Mapping, Union

from ..caps import get_caps
from ..errors import InputError, ResourceError

Rational = Fraction
Number = Union[int, Fraction]

GE, GT, EQ = ">=", ">", "="
RELATIONS = (GE, GT, EQ)


def _frac(value: Number) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"expected an exact number, got {type(value).__name__}")


@dataclass(frozen=True)
class LinTerm:
    """Affine term ``sum(c_i * x_i) + constant``; zero coefficients are never stored."""

    coeffs: tuple[tuple[str, Fraction], ...] = ()
    constant: Fraction = Fraction(0)

    @classmethod
    def of(cls, coeffs: Mapping[str, Number] | None = None, constant: Number = 0) -> LinTerm:
        items = tuple(sorted((v, _frac(c)) for v, c in (coeffs or {}).items() if c != 0))
        return cls(items, _frac(constant))

    @classmethod
    def var(cls, name: str) -> LinTerm:
        return cls(((name, Fraction(1)),), Fraction(0))

    @classmethod
    def const(cls, value: Number) -> LinTerm:
        return cls((), _frac(value))

    def as_dict(self) -> dict[str, Fraction]:
        return dict(self.coeffs)

    def coeff(self, name: str) -> Fraction:
        for v, c in self.coeffs:
            if v == name:
                return c
        return Fraction(0)

    def variables(self) -> frozenset[str]:
        return frozenset(v for v, _ in self.coeffs)

    @property
    def is_constant(self) -> bool:
        return not self.coeffs

    def __add__(self, other: LinTerm | Number) -> LinTerm:
        if not isinstance(other, LinTerm):
            return LinTerm(self.coeffs, self.constant + _frac(other))
        merged = self.as_dict()
        for v, c in other.coeffs:
            merged[v] = merged.get(v, 0) + c
        return LinTerm.of(merged, self.constant + other.constant)

    __radd__ = __add__

    def __neg__(self) -> LinTerm:
        return LinTerm(tuple((v, -c) for v, c in self.coeffs), -self.constant)

    def __sub__(self, other: LinTerm | Number) -> LinTerm:
        if not isinstance(other, LinTerm):
            other = LinTerm.const(other)
        return self + (-other)

    def __rsub__(self, other: Number) -> LinTerm:
        return LinTerm.const(other) - self

    def scale(self, k: Number) -> LinTerm:
        k = _frac(k)
        if k == 0:
            return LinTerm()
        return LinTerm(tuple((v, c * k) for v, c in self.coeffs), self.constant * k)

    def __mul__(self, other: LinTerm | Number) -> LinTerm:
        if not isinstance(other, LinTerm):
            return self.scale(other)
        if self.is_constant:
            return other.scale(self.constant)
        if other.is_constant:
            return self.scale(other.constant)
        raise InputError(f"nonlinear term: ({self}) * ({other})")

    __rmul__ = __mul__

    def evaluate(self, assignment: Mapping[str, Number]) -> Fraction:
        total = self.constant
        for v, c in self.coeffs:
            try:
                total += c * assignment[v]
            except KeyError:
                raise KeyError(f"variable {v!r} is not assigned") from None
        return total

    def rename(self, mapping: Mapping[str, str]) -> LinTerm:
        if not any(v in mapping for v, _ in self.coeffs):
            return self
        merged: dict[str, Fraction] = {}
        for v, c in self.coeffs:
            w = mapping.get(v, v)
            merged[w] = merged.get(w, 0) + c
        return LinTerm.of(merged, self.constant)

    def substitute(self, values: Mapping[str, Union[Number, LinTerm]]) -> LinTerm:
        out = LinTerm.const(self.constant)
        rest = {}
        for v, c in self.coeffs:
            if v in values:
                val = values[v]
                out = out + (val.scale(c) if isinstance(val, LinTerm) else c * _frac(val))
            else:
                rest[v] = c
        return out + LinTerm.of(rest)

    def __str__(self) -> str:
        return format_sum(list(self.coeffs), self.constant)


def _format_coeff_var(c: Fraction, v: str) -> str:
    if c == 1:
        return v
    return f"{_format_number(c)}*{v}"


def _format_number(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_sum(items: list[tuple[str, Fraction]], constant: Fraction) -> str:
    parts: list[str] = []
    for v, c in items:
        if not parts:
            parts.append(("-" + _format_coeff_var(-c, v)) if c < 0 else _format_coeff_var(c, v))
        elif c < 0:
            parts.append("- " + _format_coeff_var(-c, v))
        else:
            parts.append("+ " + _format_coeff_var(c, v))
    if constant != 0 or not parts:
        if not parts:
            parts.append(_format_number(constant))
        elif constant < 0:
            parts.append("- " + _format_number(-constant))
        else:
            parts.append("+ " + _format_number(constant))
    return " ".join(parts)


def _normalize(term: LinTerm, rel: str) -> LinTerm:
    """Scale to coprime integer coefficients.

    Equalities are oriented so the greatest variable name (``x'`` after ``x``)
    has a positive coefficient, which prints transitions as ``x' = x + 1``.
    """
    if term.is_constant:
        c = term.constant
        return LinTerm.const((c > 0) - (c < 0))
    nums = [c for _, c in term.coeffs] + [term.constant]
    den = reduce(lambda a, b: a * b // gcd(a, b), (c.denominator for c in nums), 1)
    ints = [int(c * den) for c in nums]
    g = reduce(gcd, (abs(i) for i in ints if i), 0) or 1
    k = Fraction(den, g)
    if rel == EQ and term.coeffs[-1][1] < 0:
        k = -k
    return term.scale(k)


@dataclass(frozen=True)
class LinConstraint:
    """``term REL 0`` with REL one of ``>=``, ``>``, ``=``; stored in canonical scaling."""

    term: LinTerm
    rel: str

    def __post_init__(self):
        if self.rel not in RELATIONS:
            raise ValueError(f"unknown relation {self.rel!r}")
        object.__setattr__(self, "term", _normalize(self.term, self.rel))

    def variables(self) -> frozenset[str]:
        return self.term.variables()

    def holds(self, assignment: Mapping[str, Number]) -> bool:
        return _check_rel(self.term.evaluate(assignment), self.rel)

    def rename(self, mapping: Mapping[str, str]) -> LinConstraint:
        return LinConstraint(self.term.rename(mapping), self.rel)

    def substitute(self, values) -> LinConstraint:
        return LinConstraint(self.term.substitute(values), self.rel)

    def negate(self) -> Formula:
        if self.rel == GE:
            return atom(-self.term, GT)
        if self.rel == GT:
            return atom(-self.term, GE)
        return disj(atom(self.term, GT), atom(-self.term, GT))

    def __str__(self) -> str:
        t = self.term
        if t.is_constant:
            return f"{_format_number(t.constant)} {self.rel} 0"
        pos = [(v, c) for v, c in t.coeffs if c > 0]
        neg = [(v, -c) for v, c in t.coeffs if c < 0]
        rel = self.rel
        if not pos:
            # Flip sides so the left-hand side is never empty.
            pos, neg = neg, []
            rhs_const = t.constant
            rel = {GE: "<=", GT: "<", EQ: "="}[rel]
        else:
            rhs_const = -t.constant
        return f"{format_sum(pos, Fraction(0))} {rel} {format_sum(neg, rhs_const)}"


def _check_rel(value: Fraction, rel: str) -> bool:
    if rel == GE:
        return value >= 0
    if rel == GT:
        return value > 0
    return value == 0


# --------------------------------------------------------------------------
# Formulas

class Formula:
    """Base class of NNF formulas. Instances are immutable and hashable."""

    __slots__ = ()

    def __and__(self, other: Formula) -> Formula:
        return conj(self, other)

    def __or__(self, other: Formula) -> Formula:
        return disj(self, other)

    def __invert__(self) -> Formula:
        return negate(self)


@dataclass(frozen=True)
class Top(Formula):
    def __str__(self):
        return "true"


@dataclass(frozen=True)
class Bottom(Formula):
    def __str__(self):
        return "false"


TRUE = Top()
FALSE = Bottom()


@dataclass(frozen=True)
class Atom(Formula):
    constraint: LinConstraint

    def __str__(self):
        return str(self.constraint)


@dataclass(frozen=True)
class And(Formula):
    children: tuple[Formula, ...]

    def __str__(self):
        return " && ".join(f"({c})" if isinstance(c, Or) else str(c) for c in self.children)


@dataclass(frozen=True)
class Or(Formula):
    children: tuple[Formula, ...]

    def __str__(self):
        return " || ".join(f"({c})" if isinstance(c, And) else str(c) for c in self.children)


def atom(term: LinTerm, rel: str) -> Formula:
    """Build an atom, folding variable-free constraints to ``TRUE``/``FALSE``."""
    if term.is_constant:
        return TRUE if _check_rel(term.constant, rel) else FALSE
    return Atom(LinConstraint(term, rel))


def conj(*parts: Formula | Iterable[Formula]) -> Formula:
    flat: list[Formula] = []
    seen = set()
    for part in _flatten_args(parts):
        if part is TRUE or isinstance(part, Top):
            continue
        if isinstance(part, Bottom):
            return FALSE
        for child in part.children if isinstance(part, And) else (part,):
            if child not in seen:
                seen.add(child)
                flat.append(child)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def disj(*parts: Formula | Iterable[Formula]) -> Formula:
    flat: list[Formula] = []
    seen = set()
    for part in _flatten_args(parts):
        if isinstance(part, Bottom):
            continue
        if isinstance(part, Top):
            return TRUE
        for child in part.children if isinstance(part, Or) else (part,):
            if child not in seen:
                seen.add(child)
                flat.append(child)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def _flatten_args(parts):
    for p in parts:
        if isinstance(p, Formula):
            yield p
        else:
            yield from p


def negate(f: Formula) -> Formula:
    if isinstance(f, Top):
        return FALSE
    if isinstance(f, Bottom):
        return TRUE
    if isinstance(f, Atom):
        return f.constraint.negate()
    if isinstance(f, And):
        return disj(negate(c) for c in f.children)
    if isinstance(f, Or):
        return conj(negate(c) for c in f.children)
    raise TypeError(f"not an NNF formula: {f!r}")


def implies(a: Formula, b: Formula) -> Formula:
    return disj(negate(a), b)


# --------------------------------------------------------------------------
# Raw (pre-NNF) syntax

@dataclass(frozen=True)
class Cmp:
    """Raw comparison ``lhs op rhs`` with op among ``<= < = != > >=``."""

    lhs: LinTerm
    op: str
    rhs: LinTerm


@dataclass(frozen=True)
class Not:
    arg: object


@dataclass(frozen=True)
class RawAnd:
    args: tuple


@dataclass(frozen=True)
class RawOr:
    args: tuple


def compare(lhs: LinTerm, op: str, rhs: LinTerm) -> Formula:
    diff = lhs - rhs
    if op == ">=":
        return atom(diff, GE)
    if op == ">":
        return atom(diff, GT)
    if op == "<=":
        return atom(-diff, GE)
    if op == "<":
        return atom(-diff, GT)
    if op == "=":
        return atom(diff, EQ)
    if op == "!=":
        return disj(atom(diff, GT), atom(-diff, GT))
    raise InputError(f"unknown comparison operator {op!r}")


def nnf(raw) -> Formula:
    """Push negations into atoms. Already-NNF input is returned structurally unchanged."""
    return _nnf(raw, False)


def _nnf(raw, negated: bool) -> Formula:
    if isinstance(raw, Not):
        return _nnf(raw.arg, not negated)
    if isinstance(raw, Cmp):
        f = compare(raw.lhs, raw.op, raw.rhs)
        return negate(f) if negated else f
    if isinstance(raw, (RawAnd, And)):
        args = raw.args if isinstance(raw, RawAnd) else raw.children
        parts = [_nnf(a, negated) for a in args]
        return disj(parts) if negated else conj(parts)
    if isinstance(raw, (RawOr, Or)):
        args = raw.args if isinstance(raw, RawOr) else raw.children
        parts = [_nnf(a, negated) for a in args]
        return conj(parts) if negated else disj(parts)
    if isinstance(raw, (Top, Bottom, Atom)):
        return negate(raw) if negated else raw
    if isinstance(raw, bool):
        return (FALSE if raw else TRUE) if negated else (TRUE if raw else FALSE)
    raise InputError(f"cannot normalize {raw!r}")


# --------------------------------------------------------------------------
# Cubes, DNF, evaluation, renaming

Cube = tuple  # tuple[LinConstraint, ...]; a conjunction


def cube(*constraints: LinConstraint) -> Cube:
    return normalize_cube(constraints)


def normalize_cube(constraints: Iterable[LinConstraint]) -> Cube:
    """Drop duplicates, keep first-occurrence order."""
    return tuple(dict.fromkeys(constraints))


def cube_formula(c: Cube) -> Formula:
    return conj(atom(k.term, k.rel) for k in c)


def dnf(f: Formula, cap: int | None = None) -> list[Cube]:
    """Syntactic distribution into cubes (no satisfiability pruning)."""
    cap = cap or get_caps().dnf
    return [normalize_cube(c) for c in _dnf(f, cap)]


def _dnf(f: Formula, cap: int) -> list[tuple]:
    if isinstance(f, Top):
        return [()]
    if isinstance(f, Bottom):
        return []
    if isinstance(f, Atom):
        return [(f.constraint,)]
    if isinstance(f, Or):
        out: list[tuple] = []
        for child in f.children:
            out.extend(_dnf(child, cap))
            if len(out) > cap:
                raise ResourceError(f"DNF exceeds {cap} cubes")
        return out
    if isinstance(f, And):
        acc: list[tuple] = [()]
        for child in f.children:
            parts = _dnf(child, cap)
            if len(acc) * len(parts) > cap:
                raise ResourceError(f"DNF exceeds {cap} cubes")
            acc = [a + p for a in acc for p in parts]
        return acc
    raise TypeError(f"not an NNF formula: {f!r}")


def evaluate(f: Formula, assignment: Mapping[str, Number]) -> bool:
    if isinstance(f, Top):
        return True
    if isinstance(f, Bottom):
        return False
    if isinstance(f, Atom):
        return f.constraint.holds(assignment)
    if isinstance(f, And):
        return all(evaluate(c, assignment) for c in f.children)
    if isinstance(f, Or):
        return any(evaluate(c, assignment) for c in f.children)
    raise TypeError(f"not an NNF formula: {f!r}")


def free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, Atom):
        return f.constraint.variables()
    if isinstance(f, (And, Or)):
        return frozenset().union(*(free_vars(c) for c in f.children))
    return frozenset()


def rename(f: Formula, mapping: Mapping[str, str]) -> Formula:
    """Simultaneous renaming of free variables."""
    if not mapping:
        return f
    if isinstance(f, Atom):
        return atom(f.constraint.term.rename(mapping), f.constraint.rel)
    if isinstance(f, And):
        return conj(rename(c, mapping) for c in f.children)
    if isinstance(f, Or):
        return disj(rename(c, mapping) for c in f.children)
    return f


def substitute(f: Formula, values: Mapping[str, Union[Number, LinTerm]]) -> Formula:
    """Replace variables by numbers or terms, folding constant atoms."""
    if isinstance(f, Atom):
        return atom(f.constraint.term.substitute(values), f.constraint.rel)
    if isinstance(f, And):
        return conj(substitute(c, values) for c in f.children)
    if isinstance(f, Or):
        return disj(substitute(c, values) for c in f.children)
    return f


def size(f: Formula) -> int:
    if isinstance(f, (And, Or)):
        return 1 + sum(size(c) for c in f.children)
    return 1
