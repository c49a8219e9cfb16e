"""Transition systems and the ``.ts`` surface language.

A program is a flat transition system::

    system p1 {
      var x: int[0,20];
      init: x = 0;
      next: x < 10 && x' = x + 1;
      safe: x <= 10;
    }

The ``system NAME { ... }`` wrapper is optional. Bounds on ``int`` variables
are part of the sort: a bounded variable only ever takes values in its range.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import InputError
from .formula import (FALSE, TRUE, Formula, LinTerm, compare, conj, disj, free_vars, negate,
                      rename as _rename)

ROLES = ("init", "next", "safe", "final", "p", "q", "env", "goal")
RELATIONAL_ROLES = frozenset({"next", "env"})

SCHEMA_ROLES = {
    "safety-fwd": ("init", "next", "safe"),
    "safety-bwd": ("init", "next", "safe"),
    "safety-comb": ("init", "next", "safe"),
    "termination": ("init", "next"),
    "noninterference": ("init", "next", "final"),
    "exists-until": ("init", "next", "p", "q"),
    "reach-game": ("init", "env", "goal"),
}
SCHEMAS = tuple(SCHEMA_ROLES)


def prime(name: str, n: int = 1) -> str:
    return name + "'" * n


@dataclass(frozen=True)
class SortedVar:
    name: str
    sort: str = "int"  # "int" or "rat"
    bounds: tuple[int, int] | None = None

    def __post_init__(self):
        if self.sort not in ("int", "rat"):
            raise InputError(f"unknown sort {self.sort!r} for {self.name}")
        if self.bounds is not None:
            if self.sort != "int":
                raise InputError(f"bounds are only allowed on int variables ({self.name})")
            lo, hi = self.bounds
            if lo > hi:
                raise InputError(f"empty range [{lo},{hi}] for {self.name}")

    @property
    def is_int(self) -> bool:
        return self.sort == "int"

    def renamed(self, name: str) -> SortedVar:
        return SortedVar(name, self.sort, self.bounds)

    def __str__(self):
        if self.bounds is None:
            return f"{self.name}: {self.sort}"
        return f"{self.name}: int[{self.bounds[0]},{self.bounds[1]}]"


@dataclass(frozen=True)
class TransitionSystem:
    name: str
    vars: tuple[SortedVar, ...]
    assertions: dict = field(default_factory=dict)

    def __getitem__(self, role: str) -> Formula:
        return self.assertions[role]

    def get(self, role: str, default=None):
        return self.assertions.get(role, default)

    def has(self, role: str) -> bool:
        return role in self.assertions

    @property
    def names(self) -> list[str]:
        return [v.name for v in self.vars]

    def var(self, name: str) -> SortedVar:
        for v in self.vars:
            if v.name == name:
                return v
        raise KeyError(name)

    @property
    def is_bounded(self) -> bool:
        return all(v.is_int and v.bounds is not None for v in self.vars)

    def bounds(self) -> dict[str, tuple[int, int]]:
        return {v.name: v.bounds for v in self.vars if v.bounds is not None}

    def int_names(self) -> frozenset[str]:
        return frozenset(v.name for v in self.vars if v.is_int)

    def __str__(self) -> str:
        return format_program(self)


@dataclass(frozen=True)
class Trace:
    states: tuple[dict, ...]
    initialized: bool = True

    def __len__(self):
        return len(self.states)


def validate_for(ts: TransitionSystem, schema: str) -> list[str]:
    """Roles required by ``schema`` that ``ts`` does not define (empty list = ok)."""
    if schema not in SCHEMA_ROLES:
        raise InputError(f"unknown schema {schema!r}; expected one of {', '.join(SCHEMAS)}")
    return [r for r in SCHEMA_ROLES[schema] if not ts.has(r)]


def rename(f: Formula, mapping: Mapping[str, str]) -> Formula:
    return _rename(f, mapping)


# --------------------------------------------------------------------------
# Lexer

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_.]*'*)
  | (?P<op>&&|\|\||<=|>=|!=|==|:=|->|[{}()\[\];:,!<>=+\-*/])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise InputError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            out.append(Token(kind, m.group(), line, m.start() - line_start + 1))
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


class Parser:
    """Recursive-descent parser shared by programs and model files."""

    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, message: str, tok: Token | None = None):
        tok = tok or self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise InputError(f"{message} (found {found})", tok.line, tok.col)

    def at(self, *texts: str) -> bool:
        return self.tok.kind in ("op", "ident") and self.tok.text in texts

    def accept(self, text: str) -> Token | None:
        if self.at(text):
            tok = self.tok
            self.i += 1
            return tok
        return None

    def expect(self, text: str) -> Token:
        tok = self.accept(text)
        if tok is None:
            self.error(f"expected {text!r}")
        return tok

    def ident(self) -> Token:
        if self.tok.kind != "ident":
            self.error("expected an identifier")
        tok = self.tok
        self.i += 1
        return tok

    def integer(self) -> int:
        sign = -1 if self.accept("-") else 1
        if self.tok.kind != "num":
            self.error("expected an integer")
        value = int(self.tok.text)
        self.i += 1
        return sign * value

    # formulas ------------------------------------------------------------

    def formula(self) -> Formula:
        parts = [self.conjunction()]
        while self.accept("||"):
            parts.append(self.conjunction())
        return disj(parts)

    def conjunction(self) -> Formula:
        parts = [self.unary()]
        while self.accept("&&"):
            parts.append(self.unary())
        return conj(parts)

    def unary(self) -> Formula:
        if self.accept("!"):
            return negate(self.unary())
        if self.accept("true"):
            return TRUE
        if self.accept("false"):
            return FALSE
        if self.at("("):
            start = self.i
            try:
                return self.comparison()
            except InputError:
                self.i = start
            self.expect("(")
            f = self.formula()
            self.expect(")")
            return f
        return self.comparison()

    def comparison(self) -> Formula:
        lhs = self.term()
        tok = self.tok
        if not self.at("<=", "<", "=", "==", "!=", ">", ">="):
            self.error("expected a comparison operator")
        self.i += 1
        rhs = self.term()
        op = "=" if tok.text == "==" else tok.text
        return compare(lhs, op, rhs)

    def term(self) -> LinTerm:
        if self.accept("-"):
            t = -self.product()
        else:
            self.accept("+")
            t = self.product()
        while self.at("+", "-"):
            op = self.tok.text
            self.i += 1
            rhs = self.product()
            t = t + rhs if op == "+" else t - rhs
        return t

    def product(self) -> LinTerm:
        t = self.factor()
        while self.at("*"):
            tok = self.tok
            self.i += 1
            rhs = self.factor()
            try:
                t = t * rhs
            except InputError as exc:
                raise InputError(str(exc), tok.line, tok.col) from None
        return t

    def factor(self) -> LinTerm:
        tok = self.tok
        if self.accept("-"):
            return -self.factor()
        if tok.kind == "num":
            self.i += 1
            value = Fraction(int(tok.text))
            if self.at("/"):
                self.i += 1
                if self.tok.kind != "num":
                    self.error("division is only allowed between integer literals")
                den = int(self.tok.text)
                if den == 0:
                    self.error("division by zero")
                self.i += 1
                value = value / den
            return LinTerm.const(value)
        if tok.kind == "ident" and tok.text not in ("true", "false"):
            self.i += 1
            if self.at("/"):
                self.error("division is only allowed between integer literals")
            return LinTerm.var(tok.text)
        if self.accept("("):
            t = self.term()
            self.expect(")")
            return t
        self.error("expected a term")


def parse_program(text: str, name: str = "main") -> TransitionSystem:
    p = Parser(text)
    wrapped = p.accept("system") is not None
    if wrapped:
        name = p.ident().text
        p.expect("{")
    variables: list[SortedVar] = []
    assertions: dict[str, Formula] = {}
    role_tokens: dict[str, Token] = {}
    while p.at("var"):
        p.i += 1
        tok = p.ident()
        if "'" in tok.text:
            raise InputError("primed variables cannot be declared", tok.line, tok.col)
        if any(v.name == tok.text for v in variables):
            raise InputError(f"duplicate variable {tok.text!r}", tok.line, tok.col)
        if tok.text in ROLES or tok.text in ("true", "false", "system", "var", "int", "rat"):
            raise InputError(f"reserved name {tok.text!r}", tok.line, tok.col)
        p.expect(":")
        sort_tok = p.ident()
        bounds = None
        if sort_tok.text not in ("int", "rat"):
            raise InputError(f"unknown sort {sort_tok.text!r}", sort_tok.line, sort_tok.col)
        if p.accept("["):
            lo = p.integer()
            p.expect(",")
            hi = p.integer()
            p.expect("]")
            bounds = (lo, hi)
        p.expect(";")
        try:
            variables.append(SortedVar(tok.text, sort_tok.text, bounds))
        except InputError as exc:
            raise InputError(str(exc), tok.line, tok.col) from None
    declared = {v.name for v in variables}
    while p.tok.kind == "ident" and p.tok.text in ROLES:
        tok = p.ident()
        if tok.text in assertions:
            raise InputError(f"role {tok.text!r} defined twice", tok.line, tok.col)
        p.expect(":")
        f = p.formula()
        p.expect(";")
        if tok.text in RELATIONAL_ROLES:
            def ok(v):
                return v in declared or (v.endswith("'") and v[:-1] in declared)
        else:
            def ok(v):
                return v in declared
        for v in sorted(free_vars(f)):
            if ok(v):
                continue
            base = v.rstrip("'")
            if base in declared:
                raise InputError(f"primed variable {v!r} is only allowed in next/env, not in "
                                 f"{tok.text}", tok.line, tok.col)
            raise InputError(f"undeclared variable {v!r} in {tok.text}", tok.line, tok.col)
        assertions[tok.text] = f
        role_tokens[tok.text] = tok
    if wrapped:
        p.expect("}")
    if p.tok.kind != "eof":
        if p.tok.kind == "ident" and p.tok.text == "var":
            p.error("variable declarations must precede role sections")
        p.error("expected a role section (init, next, safe, final, p, q, env, goal)")
    if not variables:
        raise InputError("a system needs at least one variable")
    ordered = {r: assertions[r] for r in ROLES if r in assertions}
    return TransitionSystem(name, tuple(variables), ordered)


def parse_formula(text: str) -> Formula:
    p = Parser(text)
    f = p.formula()
    if p.tok.kind != "eof":
        p.error("unexpected trailing input")
    return f


def format_program(ts: TransitionSystem) -> str:
    lines = [f"system {ts.name} {{"]
    lines += [f"  var {v};" for v in ts.vars]
    lines += [f"  {role}: {ts.assertions[role]};" for role in ROLES if role in ts.assertions]
    lines.append("}")
    return "\n".join(lines) + "\n"


def load_program(path) -> TransitionSystem:
    from pathlib import Path

    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    return parse_program(text, name=re.sub(r"\W", "_", path.stem) or "main")


def primed_names(names: Iterable[str], n: int = 1) -> list[str]:
    return [prime(v, n) for v in names]
