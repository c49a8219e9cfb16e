"""Constrained Horn clauses with existential heads and well-foundedness marks."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union

from ..formula import TRUE, Formula, Or, free_vars
from ..program import SortedVar, TransitionSystem


def _conjunct(f: Formula, joined: bool) -> str:
    return f"({f})" if joined and isinstance(f, Or) else str(f)


@dataclass(frozen=True)
class PredicateSymbol:
    name: str
    params: tuple[SortedVar, ...]
    kind: str = "unknown"  # or "defined"

    @property
    def arity(self) -> int:
        return len(self.params)

    @property
    def sorts(self) -> tuple[str, ...]:
        return tuple(p.sort for p in self.params)

    @property
    def param_names(self) -> list[str]:
        return [p.name for p in self.params]

    def __str__(self):
        return f"{self.name}({', '.join(f'{p.name}: {p.sort}' for p in self.params)})"


@dataclass(frozen=True)
class PredicateAtom:
    pred: str
    args: tuple[str, ...]

    def __str__(self):
        return f"{self.pred}({', '.join(self.args)})"


@dataclass(frozen=True)
class ExistsHead:
    vars: tuple[SortedVar, ...]
    atoms: tuple[PredicateAtom, ...]
    constraint: Formula = TRUE

    def __str__(self):
        parts = [str(a) for a in self.atoms]
        if self.constraint != TRUE:
            parts.append(_conjunct(self.constraint, bool(parts)))
        names = ", ".join(v.name for v in self.vars)
        return f"exists {names}. {' && '.join(parts) or 'true'}"


@dataclass(frozen=True)
class FalseHead:
    def __str__(self):
        return "false"


FALSE_HEAD = FalseHead()
Head = Union[PredicateAtom, ExistsHead, FalseHead]


@dataclass(frozen=True)
class Clause:
    universals: tuple[SortedVar, ...]
    body: tuple[PredicateAtom, ...]
    constraint: Formula
    head: Head
    label: str = ""

    @property
    def is_query(self) -> bool:
        return isinstance(self.head, FalseHead)

    @property
    def has_exists(self) -> bool:
        return isinstance(self.head, ExistsHead)

    def head_atoms(self) -> tuple[PredicateAtom, ...]:
        if isinstance(self.head, PredicateAtom):
            return (self.head,)
        if isinstance(self.head, ExistsHead):
            return self.head.atoms
        return ()

    def all_vars(self) -> tuple[SortedVar, ...]:
        extra = self.head.vars if isinstance(self.head, ExistsHead) else ()
        return tuple(self.universals) + tuple(extra)

    def int_vars(self) -> frozenset[str]:
        return frozenset(v.name for v in self.all_vars() if v.is_int)

    def bounds(self) -> dict[str, tuple[int, int]]:
        return {v.name: v.bounds for v in self.all_vars() if v.bounds is not None}

    def __str__(self):
        body = [str(a) for a in self.body]
        if self.constraint != TRUE or not body:
            body.append(_conjunct(self.constraint, bool(body)))
        names = ", ".join(v.name for v in self.universals)
        prefix = f"forall {names}. " if names else ""
        return f"{prefix}{' && '.join(body)} -> {self.head}"


@dataclass(frozen=True)
class WfMark:
    pred: str


@dataclass(frozen=True)
class HornSystem:
    predicates: tuple[PredicateSymbol, ...]
    clauses: tuple[Clause, ...]
    wf_marks: tuple[WfMark, ...] = ()
    schema: str = ""
    source_name: str = ""
    variant: str = "corrected"
    roles: tuple[tuple[str, str], ...] = ()
    source: TransitionSystem | None = field(default=None, compare=False, repr=False)

    def predicate(self, name: str) -> PredicateSymbol:
        for p in self.predicates:
            if p.name == name:
                return p
        raise KeyError(name)

    def role(self, role: str) -> str:
        """Predicate name playing ``role`` (``inv``, ``round``, ...) after collision renaming."""
        return dict(self.roles).get(role, role)

    @property
    def unknowns(self) -> tuple[PredicateSymbol, ...]:
        return tuple(p for p in self.predicates if p.kind == "unknown")

    @property
    def wf_preds(self) -> frozenset[str]:
        return frozenset(m.pred for m in self.wf_marks)

    @property
    def has_exists(self) -> bool:
        return any(c.has_exists for c in self.clauses)

    @property
    def recursion_only(self) -> bool:
        return not self.has_exists and not self.wf_marks

    def clauses_defining(self, pred: str) -> Iterator[tuple[int, Clause]]:
        for i, c in enumerate(self.clauses):
            if any(a.pred == pred for a in c.head_atoms()):
                yield i, c

    def clause_id(self, index: int) -> str:
        return self.clauses[index].label or f"c{index + 1}"

    def __str__(self):
        return format_system(self)


def format_system(hs: HornSystem) -> str:
    title = hs.schema or "horn"
    if hs.source_name:
        title += f" ({hs.source_name}"
        title += f", {hs.variant})" if hs.variant else ")"
    lines = [f"horn system {title}"]
    for p in hs.predicates:
        lines.append(f"  {p.kind} {p}")
    for i, c in enumerate(hs.clauses):
        lines.append(f"  [{hs.clause_id(i)}] {c}")
    for m in hs.wf_marks:
        lines.append(f"  wf({m.pred})")
    return "\n".join(lines) + "\n"


def well_formed(hs: HornSystem) -> list[str]:
    """Diagnostics for arity/sort mismatches, scoping errors and bad wf marks."""
    diags: list[str] = []
    preds: dict[str, PredicateSymbol] = {}
    for p in hs.predicates:
        if p.name in preds:
            diags.append(f"predicate {p.name} declared twice")
        preds[p.name] = p
        names = p.param_names
        if len(set(names)) != len(names):
            diags.append(f"predicate {p.name} has duplicate parameter names")
    labels = [c.label for c in hs.clauses if c.label]
    if len(set(labels)) != len(labels):
        diags.append("clause labels are not unique")

    def check_atom(atom: PredicateAtom, scope: dict[str, SortedVar], where: str):
        p = preds.get(atom.pred)
        if p is None:
            diags.append(f"{where}: undeclared predicate {atom.pred}")
            return
        if len(atom.args) != p.arity:
            diags.append(f"{where}: {atom.pred} expects {p.arity} arguments, got {len(atom.args)}")
            return
        for arg, param in zip(atom.args, p.params):
            var = scope.get(arg)
            if var is None:
                diags.append(f"{where}: variable {arg} in {atom} is not in scope")
            elif var.sort != param.sort:
                diags.append(f"{where}: {arg} has sort {var.sort} but {atom.pred} expects "
                             f"{param.sort}")

    for i, c in enumerate(hs.clauses):
        where = f"clause {hs.clause_id(i)}"
        scope = {}
        for v in c.universals:
            if v.name in scope:
                diags.append(f"{where}: variable {v.name} bound twice")
            scope[v.name] = v
        for a in c.body:
            check_atom(a, scope, where)
        stray = free_vars(c.constraint) - scope.keys()
        if stray:
            diags.append(f"{where}: constraint mentions unbound {', '.join(sorted(stray))}")
        if isinstance(c.head, PredicateAtom):
            check_atom(c.head, scope, where)
        elif isinstance(c.head, ExistsHead):
            inner = dict(scope)
            for v in c.head.vars:
                if v.name in inner:
                    diags.append(f"{where}: existential {v.name} shadows a bound variable")
                inner[v.name] = v
            for a in c.head.atoms:
                check_atom(a, inner, where)
            stray = free_vars(c.head.constraint) - inner.keys()
            if stray:
                diags.append(f"{where}: head constraint mentions unbound "
                             f"{', '.join(sorted(stray))}")
        elif not isinstance(c.head, FalseHead):
            diags.append(f"{where}: unsupported head {c.head!r}")
    for m in hs.wf_marks:
        p = preds.get(m.pred)
        if p is None:
            diags.append(f"wf mark on undeclared predicate {m.pred}")
            continue
        if p.kind != "unknown":
            diags.append(f"wf mark on non-unknown predicate {m.pred}")
        if p.arity % 2:
            diags.append(f"wf mark on {m.pred} of odd arity {p.arity}")
        elif p.sorts[: p.arity // 2] != p.sorts[p.arity // 2:]:
            diags.append(f"wf mark on {m.pred}: the two state halves have different sorts")
    return diags
