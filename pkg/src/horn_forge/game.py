"""Explicit-state solving of forall-exists Horn systems.

Existential-until and reachability games are decided by an attractor over
the finite box of a bounded integer state space. Two entry points share the
attractor: :func:`solve` works on the generated Horn clauses and returns a
certified verdict; :func:`enumerate` plus :func:`solve_eu` /
:func:`solve_reach_game` work on the transition system directly and expose
distances and strategies for replay.
"""
from __future__ import annotations

import builtins
import itertools
import random
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .base import BaseEstimator, check_horn_system, check_is_fitted
from .caps import get_caps
from .errors import BudgetExceeded, InputError, ResourceError, UnsupportedFragment
from .formula import PointSolver
from .horn import FalseHead, HornSystem, PredicateAtom
from .model import ClosedSetEvidence, Model, Refuted, Solved, Unknown, table_formula
from .program import TransitionSystem
from .wf import TableRank

State = tuple


# --- attractor core ---------------------------------------------------------

def attractor(states: Sequence[State], bad: set, moves: Mapping[State, list]) -> dict:
    """Distances of the states from which every listed move can be answered.

    ``moves[s]`` is a list of target collections, one per opponent choice. A
    state that is not bad and has no choices is won immediately (distance 0);
    otherwise each choice needs a target already won. Returns state -> distance.
    """
    dist: dict[State, int] = {}
    pending: dict[State, int] = {}
    waiting: dict[State, list] = defaultdict(list)
    frontier = []
    for s in states:
        if s in bad:
            continue
        options = moves.get(s, ())
        if not options:
            dist[s] = 0
            frontier.append(s)
            continue
        pending[s] = len(options)
        for k, targets in builtins.enumerate(options):
            for t in targets:
                waiting[t].append((s, k))
    answered: set = set()
    level = 0
    while frontier:
        nxt = []
        for t in frontier:
            for s, k in waiting.get(t, ()):
                if s in dist or (s, k) in answered:
                    continue
                answered.add((s, k))
                pending[s] -= 1
                if pending[s] == 0:
                    dist[s] = level + 1
                    nxt.append(s)
        frontier = sorted(nxt)
        level += 1
    return dist


def best(targets, dist: Mapping[State, int]) -> State | None:
    """Winning target of least distance, ties broken lexicographically."""
    won = [t for t in targets if t in dist]
    return min(won, key=lambda t: (dist[t], t)) if won else None


# --- transition-system level ------------------------------------------------

@dataclass
class ExplicitSpace:
    names: tuple[str, ...]
    states: list[State]
    sets: dict[str, frozenset] = field(default_factory=dict)
    edges: dict[str, dict[State, list[State]]] = field(default_factory=dict)

    def __len__(self):
        return len(self.states)

    def successors(self, role: str, s: State) -> list[State]:
        return self.edges[role].get(s, [])


@dataclass
class AttractorResult:
    kind: str  # "eu" or "game"
    winning: frozenset
    distance: dict
    strategy_edges: dict
    init: frozenset
    counterstrategy: dict = field(default_factory=dict)

    @property
    def solved(self) -> bool:
        return self.init <= self.winning

    @property
    def losing_init(self) -> list[State]:
        return sorted(self.init - self.winning)


def _box(ts: TransitionSystem) -> list[State]:
    loose = [v.name for v in ts.vars if not v.is_int or v.bounds is None]
    if loose:
        raise ResourceError(f"explicit enumeration needs bounded integer variables; "
                            f"unbounded: {', '.join(loose)}")
    count = 1
    for v in ts.vars:
        count *= v.bounds[1] - v.bounds[0] + 1
    cap = get_caps().states
    if count > cap:
        raise ResourceError(f"{count} states exceed the cap of {cap}")
    return list(itertools.product(*(range(v.bounds[0], v.bounds[1] + 1) for v in ts.vars)))


def enumerate(ts: TransitionSystem, sys_move=None, sys_step: int | None = None) -> ExplicitSpace:
    """Enumerate the box of ``ts`` with its unary role sets and edge relations.

    Relational roles (``next``, ``env``) become edges; for games the system
    relation is ``sys_move`` if given, else ``next``, else a per-variable step
    bound ``sys_step``, else unrestricted.
    """
    from .generate import SchemaConfig, sys_move_constraint
    states = _box(ts)
    names = tuple(ts.names)
    primed = [n + "'" for n in names]
    bounds = {n: ts.var(n).bounds for n in names}
    bounds.update({p: ts.var(n).bounds for n, p in zip(names, primed)})
    space = ExplicitSpace(names, states)
    for role in ("init", "safe", "final", "p", "q", "goal"):
        if ts.has(role):
            solver = PointSolver(ts[role], names, bounds)
            space.sets[role] = frozenset(solver.solutions())
    relations = {r: ts[r] for r in ("next", "env") if ts.has(r)}
    if ts.has("env") or ts.has("goal"):
        if sys_move is None:
            sys_move = sys_move_constraint(ts, SchemaConfig(sys_step=sys_step), shift=0)
        relations["sys"] = sys_move
    for role, rel in relations.items():
        solver = PointSolver(rel, list(names) + primed, bounds)
        out = {}
        for s in states:
            succ = [p[len(names):] for p in solver.solutions(dict(zip(names, s)))]
            if succ:
                out[s] = succ
        space.edges[role] = out
    return space


def solve_eu(space: ExplicitSpace) -> AttractorResult:
    """Least fixpoint for E(p U q): q-states, plus p-states with a successor inside."""
    q, p = space.sets.get("q", frozenset()), space.sets.get("p", frozenset())
    bad = {s for s in space.states if s not in q and s not in p}
    moves = {s: [space.successors("next", s)] for s in space.states if s not in q and s in p}
    dist = attractor(space.states, bad, moves)
    edges = {}
    for s, d in dist.items():
        if d > 0:
            edges[s] = sorted((t for t in space.successors("next", s)
                               if t in dist and dist[t] < d), key=lambda t: (dist[t], t))
    return AttractorResult("eu", frozenset(dist), dist, edges,
                           space.sets.get("init", frozenset()))


def solve_reach_game(space: ExplicitSpace) -> AttractorResult:
    """Alternating attractor: env moves first, the system answers, goal is the target."""
    goal = space.sets.get("goal", frozenset())
    moves = {}
    for s in space.states:
        if s in goal:
            continue
        moves[s] = [space.successors("sys", e) for e in space.successors("env", s)]
    dist = attractor(space.states, set(), moves)
    edges = {}
    for s, d in dist.items():
        for e in space.successors("env", s) if d > 0 else ():
            answers = [u for u in space.successors("sys", e) if u in dist and dist[u] < d]
            edges.setdefault(e, set()).update(answers)
    edges = {e: sorted(v, key=lambda u: (dist[u], u)) for e, v in edges.items()}
    counter = {}
    for s in space.states:
        if s not in dist:
            for e in space.successors("env", s):
                if best(space.successors("sys", e), dist) is None:
                    counter[s] = e
                    break
    return AttractorResult("game", frozenset(dist), dist, edges,
                           space.sets.get("init", frozenset()), counter)


def extract_strategy(result: AttractorResult) -> dict[State, State]:
    """One successor per state: least distance, then lexicographically least."""
    return {s: succ[0] for s, succ in sorted(result.strategy_edges.items()) if succ}


def replay_eu(space: ExplicitSpace, result: AttractorResult,
              strategy: Mapping[State, State]) -> bool:
    """Follow the strategy from every initial state; q must be met within |states| steps."""
    q, p = space.sets.get("q", frozenset()), space.sets.get("p", frozenset())
    for s in sorted(result.init):
        for _ in range(len(space) + 1):
            if s in q:
                break
            t = strategy.get(s)
            if s not in p or t is None or t not in space.successors("next", s):
                return False
            s = t
        else:
            return False
    return True


def _sys_answer(space, strategy, e):
    u = strategy.get(e)
    return u if u is not None and u in space.successors("sys", e) else None


def replay_game_exhaustive(space: ExplicitSpace, result: AttractorResult,
                           strategy: Mapping[State, State]) -> bool:
    """Every env behaviour against the strategy reaches goal within |states| rounds."""
    goal = space.sets.get("goal", frozenset())
    limit = len(space)
    cleared: set = set()

    def wins(s, depth) -> bool:
        if s in goal or s in cleared:
            return True
        if depth > limit:
            return False
        for e in space.successors("env", s):
            u = _sys_answer(space, strategy, e)
            if u is None or not wins(u, depth + 1):
                return False
        cleared.add(s)
        return True

    return all(wins(s, 0) for s in sorted(result.init))


def replay_game_random(space: ExplicitSpace, result: AttractorResult,
                       strategy: Mapping[State, State], plays: int = 100, seed: int = 0) -> bool:
    goal = space.sets.get("goal", frozenset())
    rng = random.Random(seed)
    inits = sorted(result.init)
    for _ in range(plays):
        s = rng.choice(inits)
        for _ in range(len(space) + 1):
            env = space.successors("env", s)
            if s in goal or not env:
                break
            u = _sys_answer(space, strategy, rng.choice(env))
            if u is None:
                return False
            s = u
        else:
            return False
    return True


def replay(space: ExplicitSpace, result: AttractorResult, plays: int = 100, seed: int = 0,
           exhaustive_limit: int = 1000) -> bool:
    strategy = extract_strategy(result)
    if result.kind == "eu":
        return replay_eu(space, result, strategy)
    if len(space) <= exhaustive_limit:
        return replay_game_exhaustive(space, result, strategy)
    return replay_game_random(space, result, strategy, plays, seed)


# --- Horn level -------------------------------------------------------------

class _Shape:
    """The forall-exists clause layout this solver understands."""

    def __init__(self, hs: HornSystem):
        ex = [(i, c) for i, c in builtins.enumerate(hs.clauses) if c.has_exists]
        if len(ex) != 1 or len(ex[0][1].body) != 1:
            raise UnsupportedFragment("expected exactly one existential clause with one body atom")
        self.ex_index, self.ex = ex[0]
        self.inv = hs.predicate(self.ex.body[0].pred)
        targets = [a for a in self.ex.head.atoms if a.pred == self.inv.name]
        if len(targets) != 1:
            raise UnsupportedFragment("existential head must contain the body predicate once")
        self.target = targets[0]
        self.inits, self.queries = [], []
        for i, c in builtins.enumerate(hs.clauses):
            if i == self.ex_index:
                continue
            if (not c.body and isinstance(c.head, PredicateAtom)
                    and c.head.pred == self.inv.name):
                self.inits.append(c)
            elif isinstance(c.head, FalseHead) and [a.pred for a in c.body] == [self.inv.name]:
                self.queries.append(c)
            else:
                raise UnsupportedFragment(f"clause {hs.clause_id(i)} has an unsupported shape")
        for v in list(self.inv.params) + list(self.ex.all_vars()):
            if not v.is_int or v.bounds is None:
                raise ResourceError("explicit game solving needs bounded integer variables")


def _bounds(vars_) -> dict:
    return {v.name: v.bounds for v in vars_}


def _instances(clause, fixed_args, values, names=None, bounds=None):
    fixed = {}
    for a, x in zip(fixed_args, values):
        if fixed.setdefault(a, x) != x:
            return []
    names = names or [v.name for v in clause.universals]
    solver = PointSolver(clause.constraint, names, bounds or _bounds(clause.universals))
    return [dict(zip(names, p)) for p in solver.solutions(fixed)]


class HornGame:
    """Explicit arena induced by the clauses: states of ``inv``, env choices, witnesses."""

    def __init__(self, hs: HornSystem, deadline=None):
        self.hs = hs
        self.shape = sh = _Shape(hs)
        self.deadline = deadline
        count = 1
        for p in sh.inv.params:
            count *= p.bounds[1] - p.bounds[0] + 1
        if count > get_caps().states:
            raise ResourceError(f"{count} states exceed the cap of {get_caps().states}")
        self.states = list(itertools.product(*(range(p.bounds[0], p.bounds[1] + 1)
                                               for p in sh.inv.params)))
        ex = sh.ex
        self.state_args = ex.body[0].args
        self.extra = [v.name for v in ex.universals if v.name not in self.state_args]
        self.all_names = [v.name for v in ex.all_vars()]
        self.head_solver = PointSolver(ex.head.constraint, self.all_names,
                                       _bounds(ex.all_vars()))
        self.body_solver = PointSolver(ex.constraint, [v.name for v in ex.universals],
                                       _bounds(ex.universals))
        self.query_solvers = [(q, PointSolver(q.constraint, [v.name for v in q.universals],
                                              _bounds(q.universals))) for q in sh.queries]
        self.bad: set = set()
        self.moves: dict[State, list] = {}
        self.choices: dict[State, list[tuple]] = {}
        self.witness: dict[tuple, dict] = {}
        for s in self.states:
            if deadline is not None:
                deadline.check()
            if self._is_bad(s):
                self.bad.add(s)
                continue
            opts, labels = [], []
            fixed = dict(zip(self.state_args, s))
            if len(fixed) != len(set(self.state_args)):
                raise UnsupportedFragment("repeated state variables in the existential body")
            for point in self.body_solver.solutions(fixed):
                values = dict(zip([v.name for v in ex.universals], point))
                choice = tuple(values[x] for x in self.extra)
                targets = {}
                for full in self.head_solver.solutions(values):
                    w = dict(zip(self.all_names, full))
                    targets.setdefault(tuple(w[a] for a in sh.target.args), w)
                for t, w in targets.items():
                    self.witness[s, choice, t] = w
                opts.append(sorted(targets))
                labels.append(choice)
            if opts:
                self.moves[s] = opts
                self.choices[s] = labels

    def _is_bad(self, s: State) -> bool:
        for q, solver in self.query_solvers:
            fixed = {}
            ok = True
            for a, x in zip(q.body[0].args, s):
                if fixed.setdefault(a, x) != x:
                    ok = False
            if ok and solver.exists(fixed):
                return True
        return False

    def initial(self) -> list[State]:
        out = set()
        for c in self.shape.inits:
            for values in _instances(c, (), ()):
                out.add(tuple(values[a] for a in c.head.args))
        return sorted(out)

    def model(self, dist: dict, init: list[State]) -> Model:
        sh = self.shape
        closure, queue = set(init), list(init)
        facts: dict[str, set] = defaultdict(set)
        while queue:
            s = queue.pop()
            for choice, targets in zip(self.choices.get(s, ()), self.moves.get(s, ())):
                t = best(targets, dist)
                w = self.witness[s, choice, t]
                for a in sh.ex.head.atoms:
                    if a is not sh.target:
                        facts[a.pred].add(tuple(w[x] for x in a.args))
                if t not in closure:
                    closure.add(t)
                    queue.append(t)
        interp = {}
        for p in self.hs.unknowns:
            points = closure if p.name == sh.inv.name else facts.get(p.name, ())
            interp[p.name] = table_formula(p.param_names, points)
        ranks = {}
        for w in self.hs.wf_preds:
            pred = self.hs.predicate(w)
            half = pred.arity // 2
            table = {s: dist[s] for s in closure}
            ranks[w] = TableRank.of(pred.param_names[:half], table)
        return Model(interp, ranks)

    def closed_set(self, dist: dict, start: State) -> ClosedSetEvidence:
        states, queue, choices = {start}, [start], {}
        while queue:
            s = queue.pop()
            if s in self.bad:
                continue
            for choice, targets in zip(self.choices[s], self.moves[s]):
                if all(t not in dist for t in targets):
                    choices[s] = choice
                    for t in targets:
                        if t not in states:
                            states.add(t)
                            queue.append(t)
                    break
        return ClosedSetEvidence(self.shape.inv.name, tuple(sorted(states)),
                                 tuple(sorted(choices.items())))


def solve(hs: HornSystem, budget=None, deadline=None):
    """Decide a forall-exists system on its explicit arena; the verdict is certified."""
    from .certify import check_evidence, model_holds
    check_horn_system(hs)
    try:
        arena = HornGame(hs, deadline)
        dist = attractor(arena.states, arena.bad, arena.moves)
        init = arena.initial()
        losing = [s for s in init if s not in dist]
        if not losing:
            model = arena.model(dist, init)
            if model_holds(hs, model):
                return Solved(model, "attractor")
            return Unknown("attractor model failed certification")
        evidence = arena.closed_set(dist, losing[0])
        if check_evidence(hs, evidence):
            return Refuted(evidence, "attractor")
        return Unknown("closed-set evidence failed certification")
    except BudgetExceeded as exc:
        return Unknown(f"budget exhausted: {exc}")
    except (ResourceError, UnsupportedFragment) as exc:
        return Unknown(str(exc))


class AttractorSolver(BaseEstimator):
    """Estimator over transition systems: ``fit(ts)`` computes the attractor.

    ``objective`` is ``"eu"`` or ``"game"``.
    """

    def __init__(self, objective="eu", sys_step=None):
        self.objective = objective
        self.sys_step = sys_step

    def fit(self, ts, y=None):
        if self.objective not in ("eu", "game"):
            raise InputError(f"unknown objective {self.objective!r}")
        self.space_ = enumerate(ts, sys_step=self.sys_step)
        solver = solve_eu if self.objective == "eu" else solve_reach_game
        self.result_ = solver(self.space_)
        self.strategy_ = extract_strategy(self.result_)
        return self

    def predict(self, states):
        """Chosen successor for each state (None where the strategy is undefined)."""
        check_is_fitted(self)
        return [self.strategy_.get(tuple(s)) for s in states]

    def score(self, ts=None, y=None) -> float:
        check_is_fitted(self)
        return 1.0 if self.result_.solved else 0.0


__all__ = [
    "AttractorResult", "AttractorSolver", "ExplicitSpace", "HornGame", "attractor",
    "best", "enumerate", "extract_strategy", "replay", "replay_eu", "replay_game_exhaustive",
    "replay_game_random", "solve", "solve_eu", "solve_reach_game",
]
