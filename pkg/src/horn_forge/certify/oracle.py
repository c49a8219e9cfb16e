"""Explicit-state ground truth for the properties behind each schema.

Works directly on a bounded-integer transition system by enumerating its box
and evaluating the role formulas pointwise. Deliberately shares no code with
the solvers so it can arbitrate their answers.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from ..caps import get_caps
from ..errors import InputError, ResourceError
from ..formula import TRUE, evaluate, substitute
from ..program import TransitionSystem

QUERIES = ("safety", "termination", "eu", "game", "noninterference")
State = tuple


class UnboundedSorts(InputError, ResourceError):
    """The oracle only handles integer variables with declared bounds."""


@dataclass(frozen=True)
class OracleVerdict:
    query: str
    holds: bool
    evidence: dict = field(default_factory=dict, compare=False)

    @property
    def answer(self) -> str:
        return "yes" if self.holds else "no"


class _Box:
    def __init__(self, ts: TransitionSystem):
        loose = [v.name for v in ts.vars if not v.is_int or v.bounds is None]
        if loose:
            raise UnboundedSorts(f"oracle needs bounded integer variables; "
                                 f"unbounded: {', '.join(loose)}")
        caps = get_caps()
        self.names = ts.names
        self.primed = [n + "'" for n in self.names]
        ranges = [range(v.bounds[0], v.bounds[1] + 1) for v in ts.vars]
        count = 1
        for r in ranges:
            count *= len(r)
        if count > caps.states:
            raise ResourceError(f"{count} states exceed the cap of {caps.states}")
        self.states: list[State] = list(itertools.product(*ranges))
        self.ts = ts
        self._budget = caps.product
        self._succ: dict[str, dict[State, list[State]]] = {}

    def env(self, s: State) -> dict:
        return dict(zip(self.names, s))

    def test(self, role: str, s: State) -> bool:
        return evaluate(self.ts.get(role, TRUE), self.env(s))

    def states_where(self, role: str) -> set[State]:
        return {s for s in self.states if self.test(role, s)}

    def successors(self, role: str, formula=None) -> dict[State, list[State]]:
        key = role if formula is None else f"{role}#custom"
        if key not in self._succ:
            rel = self.ts[role] if formula is None else formula
            out = {}
            for s in self.states:
                partial = substitute(rel, self.env(s))
                self._budget -= len(self.states)
                if self._budget < 0:
                    raise ResourceError("product of states exceeds the evaluation cap")
                out[s] = [t for t in self.states if evaluate(partial, dict(zip(self.primed, t)))]
            self._succ[key] = out
        return self._succ[key]

    def dump(self, s: State) -> dict:
        return dict(zip(self.names, s))


def _path(parent: dict, s: State) -> list[State]:
    out = [s]
    while parent[out[-1]] is not None:
        out.append(parent[out[-1]])
    return out[::-1]


def _reach(box: _Box, sources) -> tuple[dict, list[State]]:
    succ = box.successors("next")
    parent = {s: None for s in sources}
    order = list(sorted(parent))
    queue = deque(order)
    while queue:
        s = queue.popleft()
        for t in succ[s]:
            if t not in parent:
                parent[t] = s
                order.append(t)
                queue.append(t)
    return parent, order


def _safety(box: _Box) -> OracleVerdict:
    parent, order = _reach(box, box.states_where("init"))
    for s in order:
        if not box.test("safe", s):
            trace = _path(parent, s)
            return OracleVerdict("safety", False, {"trace": [box.dump(x) for x in trace]})
    return OracleVerdict("safety", True, {"reachable": len(order),
                                          "reach": [box.dump(x) for x in sorted(order)]})


def _termination(box: _Box) -> OracleVerdict:
    succ = box.successors("next")
    parent, order = _reach(box, box.states_where("init"))
    color: dict[State, int] = {}
    for root in order:
        if root in color:
            continue
        stack = [(root, iter(succ[root]))]
        on_path = [root]
        color[root] = 1
        while stack:
            s, it = stack[-1]
            t = next(it, None)
            if t is None:
                color[s] = 2
                stack.pop()
                on_path.pop()
                continue
            if color.get(t) == 1:
                cycle = on_path[on_path.index(t):]
                stem = _path(parent, cycle[0])[:-1]
                return OracleVerdict("termination", False, {
                    "stem": [box.dump(x) for x in stem],
                    "cycle": [box.dump(x) for x in cycle]})
            if t not in color:
                color[t] = 1
                on_path.append(t)
                stack.append((t, iter(succ[t])))
    return OracleVerdict("termination", True, {"reachable": len(order)})


def _eu(box: _Box) -> OracleVerdict:
    succ = box.successors("next")
    win = box.states_where("q")
    p = box.states_where("p")
    changed = True
    while changed:
        changed = False
        for s in box.states:
            if s not in win and s in p and any(t in win for t in succ[s]):
                win.add(s)
                changed = True
    init = box.states_where("init")
    losing = sorted(init - win)
    if losing:
        return OracleVerdict("eu", False, {"losing_init": [box.dump(x) for x in losing]})
    return OracleVerdict("eu", True, {"winning": len(win)})


def sys_relation(ts: TransitionSystem, sys_step: int | None):
    """The system's move relation over ``(v, v')`` for the game query."""
    if ts.has("next"):
        return ts["next"]
    if sys_step is None:
        return TRUE
    from ..formula import LinTerm, compare, conj
    parts = []
    for n in ts.names:
        d = LinTerm.var(n + "'") - LinTerm.var(n)
        parts += [compare(d, "<=", LinTerm.const(sys_step)),
                  compare(d, ">=", LinTerm.const(-sys_step))]
    return conj(parts)


def _game(box: _Box, sys_step: int | None) -> OracleVerdict:
    env = box.successors("env")
    sys = box.successors("sys", sys_relation(box.ts, sys_step))
    goal = box.states_where("goal")
    win = set(goal) | {s for s in box.states if not env[s]}
    changed = True
    while changed:
        changed = False
        for s in box.states:
            if s in win:
                continue
            if all(any(u in win for u in sys[e]) for e in env[s]):
                win.add(s)
                changed = True
    init = box.states_where("init")
    losing = sorted(init - win)
    if losing:
        counter = {}
        for s in box.states:
            if s not in win:
                counter[s] = next(e for e in env[s] if not any(u in win for u in sys[e]))
        return OracleVerdict("game", False, {
            "losing_init": [box.dump(x) for x in losing],
            "counterstrategy": [[box.dump(s), box.dump(e)] for s, e in sorted(counter.items())],
            "winning": sorted(win)})
    return OracleVerdict("game", True, {"winning": sorted(win)})


def _noninterference(box: _Box, low_in: Sequence[str], low_out: Sequence[str]) -> OracleVerdict:
    for name in list(low_in) + list(low_out):
        if name not in box.names:
            raise InputError(f"unknown variable {name!r} in low projection")
    idx_in = [box.names.index(n) for n in low_in]
    idx_out = [box.names.index(n) for n in low_out]
    succ = box.successors("next")
    final = box.states_where("final")
    cap = get_caps().product
    outputs: dict[State, dict[State, State]] = {}
    for s in sorted(box.states_where("init")):
        seen = set()
        queue = deque(succ[s])
        seen.update(succ[s])
        while queue:
            t = queue.popleft()
            for u in succ[t]:
                if u not in seen:
                    seen.add(u)
                    queue.append(u)
        outputs[s] = {}
        for t in sorted(seen & final):
            outputs[s].setdefault(tuple(t[i] for i in idx_out), t)
    work = 0
    inits = sorted(outputs)
    for a in inits:
        for b in inits:
            if tuple(a[i] for i in idx_in) != tuple(b[i] for i in idx_in):
                continue
            work += 1
            if work > cap:
                raise ResourceError("product space exceeds the cap")
            for oa, ta in outputs[a].items():
                for ob, tb in outputs[b].items():
                    if oa != ob:
                        return OracleVerdict("noninterference", False, {
                            "run1": [box.dump(a), box.dump(ta)],
                            "run2": [box.dump(b), box.dump(tb)]})
    return OracleVerdict("noninterference", True, {"initial_states": len(inits)})


def oracle(ts: TransitionSystem, query: str, *, low_in: Sequence[str] = (),
           low_out: Sequence[str] = (), sys_step: int | None = None) -> OracleVerdict:
    """Decide ``query`` on the explicit state space of ``ts``."""
    needs = {"safety": ("init", "next", "safe"), "termination": ("init", "next"),
             "eu": ("init", "next", "p", "q"), "game": ("init", "env", "goal"),
             "noninterference": ("init", "next", "final")}
    if query not in needs:
        raise InputError(f"unknown query {query!r}; expected one of {', '.join(QUERIES)}")
    missing = [r for r in needs[query] if not ts.has(r)]
    if missing:
        raise InputError(f"missing roles: {', '.join(missing)}")
    box = _Box(ts)
    if query == "safety":
        return _safety(box)
    if query == "termination":
        return _termination(box)
    if query == "eu":
        return _eu(box)
    if query == "game":
        return _game(box, sys_step)
    return _noninterference(box, low_in, low_out)


SCHEMA_QUERY = {
    "safety-fwd": "safety", "safety-bwd": "safety", "safety-comb": "safety",
    "termination": "termination", "noninterference": "noninterference",
    "exists-until": "eu", "reach-game": "game",
}
