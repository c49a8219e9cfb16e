"""SMT-LIB2 ``HORN`` emission and re-parsing of the emitted subset.

Bounded integer variables keep their range: the emitted body starts with an
annotated conjunct ``(! (and (<= lo x) (<= x hi) ...) :hf-domain)`` so that
other solvers see the same finite semantics and the parser can recover the
sort bounds.
"""
from __future__ import annotations

import re
from fractions import Fraction

from ..errors import InputError, UnsupportedFragment
from ..formula import (EQ, FALSE, GE, GT, TRUE, And, Atom, Bottom, Formula, LinConstraint,
                       LinTerm, Top, compare, conj, disj, negate)
from ..program import SortedVar
from .ir import (FALSE_HEAD, Clause, FalseHead, HornSystem, PredicateAtom,
                 PredicateSymbol)

_SIMPLE = re.compile(r"^[A-Za-z~!@$%^&*_+=<>.?/\-][A-Za-z0-9~!@$%^&*_+=<>.?/\-]*$")
_SORTS = {"int": "Int", "rat": "Real"}
_RESERVED = {"and", "or", "not", "true", "false", "forall", "exists", "let", "=>", "ite"}


def symbol(name: str) -> str:
    if _SIMPLE.match(name) and name not in _RESERVED:
        return name
    if "|" in name or "\\" in name:
        raise UnsupportedFragment(f"cannot quote symbol {name!r}")
    return f"|{name}|"


def _num(value: Fraction, real: bool) -> str:
    if value.denominator != 1:
        text = f"(/ {abs(value.numerator)}{'.0' if real else ''} {value.denominator}"
        text += ".0)" if real else ")"
        return f"(- {text})" if value < 0 else text
    n = abs(value.numerator)
    text = f"{n}.0" if real else str(n)
    return f"(- {text})" if value < 0 else text


def _sum(items, constant: Fraction, sorts) -> str:
    real = any(sorts.get(v) == "rat" for v, _ in items)
    parts = []
    for v, c in items:
        var = symbol(v)
        if real and sorts.get(v) == "int":
            var = f"(to_real {var})"
        parts.append(var if c == 1 else f"(* {_num(c, real)} {var})")
    if constant != 0 or not parts:
        parts.append(_num(constant, real))
    return parts[0] if len(parts) == 1 else f"(+ {' '.join(parts)})"


def _constraint(c: LinConstraint, sorts) -> str:
    t = c.term
    pos = [(v, k) for v, k in t.coeffs if k > 0]
    neg = [(v, -k) for v, k in t.coeffs if k < 0]
    rel = {GE: ">=", GT: ">", EQ: "="}[c.rel]
    const = -t.constant
    if not pos:
        pos, neg, const = neg, [], t.constant
        rel = {">=": "<=", ">": "<", "=": "="}[rel]
    real = any(sorts.get(v) == "rat" for v, _ in t.coeffs)
    lhs = _sum(pos, Fraction(0), sorts) if pos else _num(Fraction(0), real)
    rhs = _sum(neg, const, sorts) if neg else _num(const, real)
    return f"({rel} {lhs} {rhs})"


def _formula(f: Formula, sorts) -> str:
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bottom):
        return "false"
    if isinstance(f, Atom):
        return _constraint(f.constraint, sorts)
    op = "and" if isinstance(f, And) else "or"
    return f"({op} {' '.join(_formula(c, sorts) for c in f.children)})"


def _atom(a: PredicateAtom) -> str:
    if not a.args:
        return symbol(a.pred)
    return f"({symbol(a.pred)} {' '.join(symbol(x) for x in a.args)})"


def _domain(vars_: tuple[SortedVar, ...]) -> str | None:
    parts = []
    for v in vars_:
        if v.bounds is not None:
            lo, hi = v.bounds
            parts.append(f"(<= {_num(Fraction(lo), False)} {symbol(v.name)})")
            parts.append(f"(<= {symbol(v.name)} {_num(Fraction(hi), False)})")
    if not parts:
        return None
    return f"(! (and {' '.join(parts)}) :hf-domain)"


def emit_smtlib(hs: HornSystem) -> str:
    """Render a recursion-only system as SMT-LIB2 HORN text (deterministic)."""
    if hs.has_exists:
        raise UnsupportedFragment("existential clause heads have no SMT-LIB HORN encoding")
    if hs.wf_marks:
        raise UnsupportedFragment("well-foundedness marks have no SMT-LIB HORN encoding")
    lines = ["(set-logic HORN)"]
    info = f"horn-forge schema={hs.schema} system={hs.source_name} variant={hs.variant}"
    lines.append(f"(set-info :source |{info}|)")
    for p in hs.predicates:
        sorts = " ".join(_SORTS[s] for s in p.sorts)
        lines.append(f"(declare-fun {symbol(p.name)} ({sorts}) Bool)")
    for c in hs.clauses:
        sorts = {v.name: v.sort for v in c.universals}
        items = []
        dom = _domain(c.universals)
        if dom:
            items.append(dom)
        items.extend(_atom(a) for a in c.body)
        if c.constraint != TRUE or not items:
            items.append(_formula(c.constraint, sorts))
        body = items[0] if len(items) == 1 else f"(and {' '.join(items)})"
        head = "false" if isinstance(c.head, FalseHead) else _atom(c.head)
        term = f"(=> {body} {head})"
        if c.universals:
            binders = " ".join(f"({symbol(v.name)} {_SORTS[v.sort]})" for v in c.universals)
            term = f"(forall ({binders}) {term})"
        if c.label:
            term = f"(! {term} :named {symbol(c.label)})"
        lines.append(f"(assert {term})")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Parsing

_TOKENS = re.compile(r"""\s+|;[^\n]*|(\()|(\))|(\|[^|]*\|)|("(?:[^"]|"")*")|([^\s()|;"]+)""")


def _read(text: str) -> list:
    stack: list[list] = [[]]
    pos = 0
    while pos < len(text):
        m = _TOKENS.match(text, pos)
        if not m:
            raise InputError(f"unreadable SMT-LIB text near {text[pos:pos + 20]!r}")
        pos = m.end()
        lpar, rpar, quoted, string, atom = m.groups()
        if lpar:
            stack.append([])
        elif rpar:
            if len(stack) == 1:
                raise InputError("unbalanced ')' in SMT-LIB text")
            done = stack.pop()
            stack[-1].append(done)
        elif quoted:
            stack[-1].append(_Sym(quoted[1:-1]))
        elif string:
            stack[-1].append(string)
        elif atom:
            stack[-1].append(_Sym(atom) if not atom.startswith(":") else atom)
    if len(stack) != 1:
        raise InputError("unbalanced '(' in SMT-LIB text")
    return stack[0]


class _Sym(str):
    """A symbol (possibly |quoted|), distinct from keywords and string literals."""


def _numeral(tok) -> Fraction | None:
    if isinstance(tok, _Sym) and re.fullmatch(r"\d+(\.\d+)?", tok):
        return Fraction(tok)
    return None


class _Reader:
    def __init__(self, preds: dict[str, PredicateSymbol]):
        self.preds = preds

    def term(self, t, scope) -> LinTerm:
        n = _numeral(t)
        if n is not None:
            return LinTerm.const(n)
        if isinstance(t, _Sym):
            if t not in scope:
                raise InputError(f"unbound variable {t!r}")
            return LinTerm.var(str(t))
        if not isinstance(t, list) or not t:
            raise InputError(f"unsupported term {t!r}")
        op, args = t[0], t[1:]
        if op == "+" and args:
            out = LinTerm()
            for a in args:
                out = out + self.term(a, scope)
            return out
        if op == "-" and len(args) == 1:
            return -self.term(args[0], scope)
        if op == "-" and len(args) > 1:
            out = self.term(args[0], scope)
            for a in args[1:]:
                out = out - self.term(a, scope)
            return out
        if op == "*" and len(args) == 2:
            return self.term(args[0], scope) * self.term(args[1], scope)
        if op == "/" and len(args) == 2:
            num, den = self.term(args[0], scope), self.term(args[1], scope)
            if not (num.is_constant and den.is_constant) or den.constant == 0:
                raise InputError("division is only supported between numerals")
            return LinTerm.const(num.constant / den.constant)
        if op == "to_real" and len(args) == 1:
            return self.term(args[0], scope)
        raise InputError(f"unsupported term operator {op!r}")

    def formula(self, t, scope) -> Formula:
        if t == "true":
            return TRUE
        if t == "false":
            return FALSE
        if not isinstance(t, list) or not t:
            raise InputError(f"unsupported formula {t!r}")
        op, args = t[0], t[1:]
        if op == "and":
            return conj(self.formula(a, scope) for a in args)
        if op == "or":
            return disj(self.formula(a, scope) for a in args)
        if op == "not" and len(args) == 1:
            return negate(self.formula(args[0], scope))
        if op in ("<=", "<", ">=", ">", "=") and len(args) == 2:
            return compare(self.term(args[0], scope), op, self.term(args[1], scope))
        raise InputError(f"unsupported formula operator {op!r}")

    def atom(self, t, scope) -> PredicateAtom | None:
        if isinstance(t, _Sym):
            name, args = t, []
        elif isinstance(t, list) and t:
            name, args = t[0], t[1:]
        else:
            return None
        if not isinstance(name, _Sym) or name not in self.preds:
            return None
        p = self.preds[name]
        if len(args) != p.arity:
            raise InputError(f"{name} expects {p.arity} arguments")
        for a in args:
            if not isinstance(a, _Sym) or a not in scope:
                raise InputError(f"predicate arguments must be bound variables, got {a!r}")
        return PredicateAtom(str(name), tuple(str(a) for a in args))


def _sort(tok) -> str:
    if tok == "Int":
        return "int"
    if tok == "Real":
        return "rat"
    raise InputError(f"unsupported sort {tok!r}")


def _domain_bounds(t, scope) -> dict[str, tuple[int, int]] | None:
    if not (isinstance(t, list) and len(t) == 3 and t[0] == "!" and t[2] == ":hf-domain"):
        return None
    inner = t[1]
    if not (isinstance(inner, list) and inner and inner[0] == "and"):
        raise InputError("malformed :hf-domain annotation")
    lows, highs = {}, {}
    for item in inner[1:]:
        if not (isinstance(item, list) and len(item) == 3 and item[0] == "<="):
            raise InputError("malformed :hf-domain bound")
        a, b = item[1], item[2]
        if isinstance(a, _Sym) and a in scope and _int_literal(b) is not None:
            highs[str(a)] = _int_literal(b)
        elif isinstance(b, _Sym) and b in scope and _int_literal(a) is not None:
            lows[str(b)] = _int_literal(a)
        else:
            raise InputError("malformed :hf-domain bound")
    if lows.keys() != highs.keys():
        raise InputError("every :hf-domain variable needs both bounds")
    return {v: (lows[v], highs[v]) for v in lows}


def _int_literal(t) -> int | None:
    if isinstance(t, list) and len(t) == 2 and t[0] == "-":
        v = _int_literal(t[1])
        return None if v is None else -v
    if isinstance(t, _Sym) and t.isdigit():
        return int(t)
    return None


def parse_smtlib_horn(text: str) -> HornSystem:
    """Parse text in the subset produced by :func:`emit_smtlib`."""
    commands = _read(text)
    if not commands:
        raise InputError("empty SMT-LIB input")
    preds: dict[str, PredicateSymbol] = {}
    clauses: list[Clause] = []
    info = {}
    saw_logic = False
    reader = _Reader(preds)
    for cmd in commands:
        if not isinstance(cmd, list) or not cmd:
            raise InputError(f"expected a command, got {cmd!r}")
        head = cmd[0]
        if head == "set-logic":
            if cmd[1:] != ["HORN"]:
                raise InputError("only (set-logic HORN) is supported")
            saw_logic = True
        elif head == "set-info":
            if len(cmd) == 3 and cmd[1] == ":source" and isinstance(cmd[2], _Sym):
                for part in str(cmd[2]).split():
                    key, _, value = part.partition("=")
                    info[key] = value
        elif head == "declare-fun":
            if len(cmd) != 4 or not isinstance(cmd[1], _Sym) or not isinstance(cmd[2], list):
                raise InputError("malformed declare-fun")
            if cmd[3] != "Bool":
                raise InputError(f"predicate {cmd[1]} must have codomain Bool, got {cmd[3]}")
            name = str(cmd[1])
            if name in preds:
                raise InputError(f"predicate {name} declared twice")
            params = tuple(SortedVar(f"{name}_{i}", _sort(s)) for i, s in enumerate(cmd[2]))
            preds[name] = PredicateSymbol(name, params)
        elif head == "assert":
            if len(cmd) != 2:
                raise InputError("malformed assert")
            clauses.append(_clause(cmd[1], reader))
        elif head in ("check-sat", "exit"):
            continue
        else:
            raise InputError(f"unsupported command {head!r}")
    if not saw_logic:
        raise InputError("missing (set-logic HORN)")
    return HornSystem(tuple(preds.values()), tuple(clauses), (), info.get("schema", ""),
                      info.get("system", ""), info.get("variant", ""))


def _clause(t, reader: _Reader) -> Clause:
    label = ""
    if isinstance(t, list) and len(t) == 4 and t[0] == "!" and t[2] == ":named":
        label = str(t[3])
        t = t[1]
    universals: tuple[SortedVar, ...] = ()
    if isinstance(t, list) and t and t[0] == "forall":
        if len(t) != 3 or not isinstance(t[1], list):
            raise InputError("malformed forall")
        binders = []
        for b in t[1]:
            if not (isinstance(b, list) and len(b) == 2 and isinstance(b[0], _Sym)):
                raise InputError("malformed binder")
            binders.append(SortedVar(str(b[0]), _sort(b[1])))
        universals = tuple(binders)
        t = t[2]
    if not (isinstance(t, list) and len(t) == 3 and t[0] == "=>"):
        raise InputError("clause must be an implication (=> body head)")
    scope = {v.name: v for v in universals}
    body_t, head_t = t[1], t[2]
    items = body_t[1:] if isinstance(body_t, list) and body_t and body_t[0] == "and" else [body_t]
    bounds: dict[str, tuple[int, int]] = {}
    atoms, constraints = [], []
    for item in items:
        dom = _domain_bounds(item, scope)
        if dom is not None:
            bounds.update(dom)
            continue
        a = reader.atom(item, scope)
        if a is not None:
            atoms.append(a)
        else:
            constraints.append(reader.formula(item, scope))
    if bounds:
        universals = tuple(SortedVar(v.name, v.sort, bounds.get(v.name)) for v in universals)
    if head_t == "false":
        head = FALSE_HEAD
    else:
        head = reader.atom(head_t, scope)
        if head is None:
            raise InputError("clause head must be a predicate application or false")
    return Clause(universals, tuple(atoms), conj(constraints), head, label)


def isomorphic(a: HornSystem, b: HornSystem) -> bool:
    """Structural equality up to predicate parameter names."""
    def preds(hs):
        return [(p.name, p.sorts, p.kind) for p in hs.predicates]

    return (preds(a) == preds(b) and a.clauses == b.clauses and a.wf_marks == b.wf_marks
            and (a.schema, a.source_name, a.variant) == (b.schema, b.source_name, b.variant))
