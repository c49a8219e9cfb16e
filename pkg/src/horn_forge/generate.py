"""Mechanical translation of transition systems into Horn constraint systems.

One generator per proof rule: forward, backward and combined safety,
termination, non-interference by self-composition, existential until, and
reachability games. Side conditions ``A -> B`` with a known ``B`` are emitted
as ``A && !B -> false``.
"""
from __future__ import annotations

from dataclasses import dataclass

from .base import BaseEstimator, TransformerMixin, check_is_fitted, check_transition_system
from .errors import InputError
from .formula import TRUE, Formula, LinTerm, compare, conj, negate, rename
from .horn import (FALSE_HEAD, Clause, ExistsHead, HornSystem, PredicateAtom, PredicateSymbol,
                   WfMark)
from .program import SCHEMAS, SortedVar, TransitionSystem

VARIANTS = ("corrected", "literal")


@dataclass(frozen=True)
class SchemaConfig:
    variant: str = "corrected"
    low_in: tuple[str, ...] | None = None
    low_out: tuple[str, ...] | None = None
    sys_step: int | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InputError(f"unknown variant {self.variant!r}")


class _Ctx:
    """Variable copies and collision-free unknown names for one system."""

    def __init__(self, ts: TransitionSystem, schema: str, cfg: SchemaConfig):
        check_transition_system(ts, schema)
        self.ts, self.schema, self.cfg = ts, schema, cfg
        self.names = ts.names
        taken = set(self.names)
        suffix = "_w"
        while any(v + suffix in taken for v in self.names):
            suffix += "w"
        self.w_suffix = suffix
        self.roles: dict[str, str] = {}
        self.preds: list[PredicateSymbol] = []
        self._taken = taken

    def copy(self, tag: str = "", primes: int = 0) -> list[SortedVar]:
        return [v.renamed(self.name_of(v.name, tag, primes)) for v in self.ts.vars]

    def name_of(self, name: str, tag: str, primes: int) -> str:
        base = name + (self.w_suffix if tag == "w" else "")
        return base + "'" * primes

    def mapping(self, src_tag="", src_primes=0, dst_tag="", dst_primes=0) -> dict[str, str]:
        return {self.name_of(v, src_tag, src_primes): self.name_of(v, dst_tag, dst_primes)
                for v in self.names}

    def role(self, role: str, key: str) -> Formula:
        return self.ts[role] if key == "" else rename(self.ts[role], self._role_map(key))

    def _role_map(self, key: str) -> dict[str, str]:
        # key: "<tag><primes of unprimed vars>" e.g. "w", "1" (v -> v', v' -> v'')
        tag = "w" if key.startswith("w") else ""
        shift = int(key.lstrip("w") or 0)
        out = {}
        for v in self.names:
            out[v] = self.name_of(v, tag, shift)
            out[v + "'"] = self.name_of(v, tag, shift + 1)
        return out

    def unknown(self, role: str, arity_states: int) -> str:
        name = role
        while name in self._taken:
            name += "_p"
        self._taken.add(name)
        self.roles[role] = name
        params = []
        for k in range(arity_states):
            params += [v.renamed(self.name_of(v.name, "", k)) for v in self.ts.vars]
        self.preds.append(PredicateSymbol(name, tuple(params)))
        return name

    def atom(self, role: str, *copies: list[SortedVar]) -> PredicateAtom:
        args = tuple(v.name for c in copies for v in c)
        return PredicateAtom(self.roles[role], args)

    def system(self, clauses, wf=()) -> HornSystem:
        return HornSystem(tuple(self.preds), tuple(clauses), tuple(WfMark(self.roles[r]) for r in wf),
                          self.schema, self.ts.name, self.cfg.variant,
                          tuple(sorted(self.roles.items())), self.ts)


def _cfg(cfg: SchemaConfig | None, variant: str | None) -> SchemaConfig:
    cfg = cfg or SchemaConfig()
    if variant is not None:
        cfg = SchemaConfig(variant, cfg.low_in, cfg.low_out, cfg.sys_step)
    return cfg


def gen_safety_forward(ts: TransitionSystem, cfg: SchemaConfig | None = None) -> HornSystem:
    ctx = _Ctx(ts, "safety-fwd", _cfg(cfg, None))
    v, v1 = ctx.copy(), ctx.copy(primes=1)
    ctx.unknown("inv", 1)
    return ctx.system([
        Clause(tuple(v), (), ts["init"], ctx.atom("inv", v), "init"),
        Clause(tuple(v + v1), (ctx.atom("inv", v),), ts["next"], ctx.atom("inv", v1), "step"),
        Clause(tuple(v), (ctx.atom("inv", v),), negate(ts["safe"]), FALSE_HEAD, "safe"),
    ])


def gen_safety_backward(ts: TransitionSystem, cfg: SchemaConfig | None = None,
                        variant: str | None = None) -> HornSystem:
    cfg = _cfg(cfg, variant)
    ctx = _Ctx(ts, "safety-bwd", cfg)
    v, v1 = ctx.copy(), ctx.copy(primes=1)
    ctx.unknown("binv", 1)
    if cfg.variant == "corrected":
        last = Clause(tuple(v), (ctx.atom("binv", v),), ts["init"], FALSE_HEAD, "init")
    else:
        last = Clause(tuple(v), (ctx.atom("binv", v),), ts["safe"], FALSE_HEAD, "safe")
    return ctx.system([
        Clause(tuple(v), (), negate(ts["safe"]), ctx.atom("binv", v), "unsafe"),
        Clause(tuple(v + v1), (ctx.atom("binv", v1),), ts["next"], ctx.atom("binv", v), "step"),
        last,
    ])


def gen_safety_combined(ts: TransitionSystem, cfg: SchemaConfig | None = None) -> HornSystem:
    ctx = _Ctx(ts, "safety-comb", _cfg(cfg, None))
    v, v1 = ctx.copy(), ctx.copy(primes=1)
    ctx.unknown("inv", 1)
    ctx.unknown("binv", 1)
    return ctx.system([
        Clause(tuple(v), (), ts["init"], ctx.atom("inv", v), "init"),
        Clause(tuple(v + v1), (ctx.atom("inv", v),), ts["next"], ctx.atom("inv", v1), "step"),
        Clause(tuple(v), (), negate(ts["safe"]), ctx.atom("binv", v), "unsafe"),
        Clause(tuple(v + v1), (ctx.atom("binv", v1),), ts["next"], ctx.atom("binv", v), "bstep"),
        Clause(tuple(v), (ctx.atom("inv", v), ctx.atom("binv", v)), TRUE, FALSE_HEAD, "meet"),
    ])


def gen_termination(ts: TransitionSystem, cfg: SchemaConfig | None = None,
                    variant: str | None = None) -> HornSystem:
    cfg = _cfg(cfg, variant)
    ctx = _Ctx(ts, "termination", cfg)
    if cfg.variant == "literal" and not ts.has("safe"):
        raise InputError("missing roles: safe (needed by the literal termination variant)")
    v, v1 = ctx.copy(), ctx.copy(primes=1)
    ctx.unknown("inv", 1)
    ctx.unknown("round", 2)
    clauses = [
        Clause(tuple(v), (), ts["init"], ctx.atom("inv", v), "init"),
        Clause(tuple(v + v1), (ctx.atom("inv", v),), ts["next"], ctx.atom("inv", v1), "step"),
    ]
    if cfg.variant == "literal":
        ctx.unknown("binv", 1)
        clauses.append(Clause(tuple(v), (), negate(ts["safe"]), ctx.atom("binv", v), "unsafe"))
    clauses.append(Clause(tuple(v + v1), (ctx.atom("inv", v),), ts["next"],
                          ctx.atom("round", v, v1), "round"))
    return ctx.system(clauses, wf=("round",))


def _low_eq(ctx: _Ctx, names, a_tag, a_primes, b_tag, b_primes) -> Formula:
    return conj(compare(LinTerm.var(ctx.name_of(n, a_tag, a_primes)), "=",
                        LinTerm.var(ctx.name_of(n, b_tag, b_primes))) for n in names)


def gen_noninterference(ts: TransitionSystem, cfg: SchemaConfig | None = None,
                        variant: str | None = None) -> HornSystem:
    cfg = _cfg(cfg, variant)
    ctx = _Ctx(ts, "noninterference", cfg)
    v, v1, v2 = ctx.copy(), ctx.copy(primes=1), ctx.copy(primes=2)
    w, w1 = ctx.copy("w"), ctx.copy("w", 1)
    ctx.unknown("io", 2)
    step = Clause(tuple(v + v1 + v2), (ctx.atom("io", v, v1),), ctx.role("next", "1"),
                  ctx.atom("io", v, v2), "step")
    init = Clause(tuple(v + v1), (), conj(ts["init"], ts["next"]), ctx.atom("io", v, v1), "init")
    pair = (ctx.atom("io", v, v1), ctx.atom("io", w, w1))
    if cfg.variant == "corrected":
        for label, names in (("low_in", cfg.low_in), ("low_out", cfg.low_out)):
            if names is None:
                raise InputError(f"non-interference needs {label} (the public variables)")
            unknown = sorted(set(names) - set(ctx.names))
            if unknown:
                raise InputError(f"{label} mentions undeclared variables: {', '.join(unknown)}")
        body = conj(_low_eq(ctx, cfg.low_in, "", 0, "w", 0),
                    ctx.role("final", "1"), ctx.role("final", "w1"),
                    negate(_low_eq(ctx, cfg.low_out, "", 1, "w", 1)))
    else:
        differ = negate(_low_eq(ctx, ctx.names, "", 0, "w", 0))
        body = conj(differ, ts["final"], ctx.role("final", "w1"),
                    negate(_low_eq(ctx, ctx.names, "w", 0, "w", 1)))
    query = Clause(tuple(v + v1 + w + w1), pair, body, FALSE_HEAD, "query")
    return ctx.system([init, step, query])


def gen_exists_until(ts: TransitionSystem, cfg: SchemaConfig | None = None,
                     variant: str | None = None) -> HornSystem:
    cfg = _cfg(cfg, variant)
    ctx = _Ctx(ts, "exists-until", cfg)
    v, v1 = ctx.copy(), ctx.copy(primes=1)
    ctx.unknown("inv", 1)
    ctx.unknown("round", 2)
    witness = ExistsHead(tuple(v1), (ctx.atom("inv", v1), ctx.atom("round", v, v1)), ts["next"])
    if cfg.variant == "corrected":
        stay = conj(negate(ts["q"]), negate(ts["p"]))
    else:
        stay = negate(ts["p"])
    return ctx.system([
        Clause(tuple(v), (), ts["init"], ctx.atom("inv", v), "init"),
        Clause(tuple(v), (ctx.atom("inv", v),), negate(ts["q"]), witness, "progress"),
        Clause(tuple(v), (ctx.atom("inv", v),), stay, FALSE_HEAD, "stay"),
    ], wf=("round",))


def sys_move_constraint(ts: TransitionSystem, cfg: SchemaConfig, shift: int = 1) -> Formula:
    """Allowed system moves from ``v^shift`` to ``v^(shift+1)``.

    The ``next`` role, when present, restricts the unknown system relation;
    otherwise ``sys_step`` bounds every per-variable change; otherwise any move.
    """
    if ts.has("next"):
        mapping = {}
        for n in ts.names:
            mapping[n] = n + "'" * shift
            mapping[n + "'"] = n + "'" * (shift + 1)
        return rename(ts["next"], mapping)
    if cfg.sys_step is None:
        return TRUE
    k = cfg.sys_step
    parts = []
    for n in ts.names:
        delta = LinTerm.var(n + "'" * (shift + 1)) - LinTerm.var(n + "'" * shift)
        parts.append(compare(delta, "<=", LinTerm.const(k)))
        parts.append(compare(delta, ">=", LinTerm.const(-k)))
    return conj(parts)


def gen_reach_game(ts: TransitionSystem, cfg: SchemaConfig | None = None) -> HornSystem:
    cfg = _cfg(cfg, None)
    ctx = _Ctx(ts, "reach-game", cfg)
    v, v1, v2 = ctx.copy(), ctx.copy(primes=1), ctx.copy(primes=2)
    ctx.unknown("inv", 1)
    ctx.unknown("round", 2)
    ctx.unknown("sys", 2)
    witness = ExistsHead(
        tuple(v2),
        (ctx.atom("sys", v1, v2), ctx.atom("inv", v2), ctx.atom("round", v, v2)),
        sys_move_constraint(ts, cfg),
    )
    return ctx.system([
        Clause(tuple(v), (), ts["init"], ctx.atom("inv", v), "init"),
        Clause(tuple(v + v1), (ctx.atom("inv", v),), conj(negate(ts["goal"]), ts["env"]),
               witness, "play"),
    ], wf=("round",))


GENERATORS = {
    "safety-fwd": gen_safety_forward,
    "safety-bwd": gen_safety_backward,
    "safety-comb": gen_safety_combined,
    "termination": gen_termination,
    "noninterference": gen_noninterference,
    "exists-until": gen_exists_until,
    "reach-game": gen_reach_game,
}
assert tuple(GENERATORS) == SCHEMAS


def generate(ts: TransitionSystem, schema: str, cfg: SchemaConfig | None = None) -> HornSystem:
    if schema not in GENERATORS:
        raise InputError(f"unknown schema {schema!r}; expected one of {', '.join(SCHEMAS)}")
    return GENERATORS[schema](ts, cfg)


class ConstraintGenerator(TransformerMixin, BaseEstimator):
    """Turn a transition system into the Horn system of one proof rule.

    >>> from horn_forge.program import parse_program
    >>> ts = parse_program("var x: int[0,20]; init: x = 0; next: x < 10 && x' = x + 1; "
    ...                    "safe: x <= 10;")
    >>> len(ConstraintGenerator("safety-fwd").fit_transform(ts).clauses)
    3
    """

    def __init__(self, schema="safety-fwd", variant="corrected", low_in=None, low_out=None,
                 sys_step=None):
        self.schema = schema
        self.variant = variant
        self.low_in = low_in
        self.low_out = low_out
        self.sys_step = sys_step

    def _config(self) -> SchemaConfig:
        return SchemaConfig(self.variant,
                            None if self.low_in is None else tuple(self.low_in),
                            None if self.low_out is None else tuple(self.low_out),
                            self.sys_step)

    def fit(self, ts, y=None):
        if self.schema not in GENERATORS:
            raise InputError(f"unknown schema {self.schema!r}")
        check_transition_system(ts, self.schema)
        self.config_ = self._config()
        self.system_name_ = ts.name
        return self

    def transform(self, ts):
        check_is_fitted(self)
        return generate(check_transition_system(ts, self.schema), self.schema, self.config_)
