"""Independent certificate checking against the clauses of a Horn system."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping

from ..caps import get_caps
from ..errors import InputError, ResourceError
from ..formula import (FALSE, TRUE, Formula, PointSolver, box_size, conj, evaluate, negate, rename,
                       sat)
from ..horn import Clause, ExistsHead, FalseHead, HornSystem, PredicateAtom
from ..model import ClosedSetEvidence, Derivation, LassoEvidence, Model, as_table
from ..wf import check_rank


@dataclass(frozen=True)
class ClauseReport:
    clause: str
    holds: bool
    witness: tuple[tuple[str, Fraction], ...] | None = None
    reason: str = ""

    @property
    def status(self) -> str:
        return "holds" if self.holds else "fails"

    def __str__(self):
        if self.holds:
            return f"{self.clause}: holds"
        parts = []
        if self.witness is not None:
            parts.append(", ".join(f"{k} = {_num(v)}" for k, v in self.witness))
        if self.reason:
            parts.append(self.reason)
        return f"{self.clause}: fails ({'; '.join(parts)})"


def _num(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


class _Interp:
    """Interpretations with finite-table membership shortcuts."""

    def __init__(self, hs: HornSystem, model: Model):
        self.hs = hs
        self.model = model
        missing = [u.name for u in hs.unknowns if u.name not in model.interp]
        if missing:
            raise InputError(f"model does not interpret: {', '.join(missing)}")
        self.params = {p.name: p.param_names for p in hs.predicates}
        self.tables = {name: as_table(f, self.params[name]) for name, f in model.interp.items()
                       if name in self.params}

    def table(self, pred: str):
        return self.tables.get(pred)

    def formula(self, atom: PredicateAtom) -> Formula:
        return rename(self.model.interp[atom.pred], dict(zip(self.params[atom.pred], atom.args)))

    def holds(self, atom: PredicateAtom, values: Mapping[str, Fraction]) -> bool:
        point = tuple(values[a] for a in atom.args)
        table = self.tables.get(atom.pred)
        if table is not None:
            return point in table
        return evaluate(self.model.interp[atom.pred], dict(zip(self.params[atom.pred], point)))


def _bounds(vars_) -> dict[str, tuple[int, int]] | None:
    out = {}
    for v in vars_:
        if not v.is_int or v.bounds is None:
            return None
        out[v.name] = v.bounds
    return out


def ground_points(atoms, constraint: Formula, names, bounds, interp: _Interp,
                  fixed: Mapping[str, int] | None = None) -> Iterator[dict[str, int]]:
    """Integer points over ``names`` satisfying the atoms and the constraint."""
    table_atoms = [a for a in atoms if interp.table(a.pred) is not None]
    other = conj([constraint] + [interp.formula(a) for a in atoms if a not in table_atoms])
    solver = PointSolver(other, names, bounds)
    cap = get_caps().box
    count = 0

    def join(i, partial):
        nonlocal count
        if i == len(table_atoms):
            for point in solver.solutions(partial):
                count += 1
                if count > cap:
                    raise ResourceError(f"more than {cap} ground instances")
                yield dict(zip(names, point))
            return
        a = table_atoms[i]
        rows = interp.table(a.pred)
        if all(x in partial for x in a.args):
            if tuple(partial[x] for x in a.args) in rows:
                yield from join(i + 1, partial)
            return
        for row in sorted(rows):
            ext = dict(partial)
            ok = True
            for x, val in zip(a.args, row):
                if ext.setdefault(x, val) != val:
                    ok = False
                    break
            if ok and all(bounds[x][0] <= ext[x] <= bounds[x][1] for x in a.args):
                yield from join(i + 1, ext)

    yield from join(0, dict(fixed or {}))


def _witness(values: Mapping[str, object], clause: Clause) -> tuple:
    out = []
    for v in clause.universals:
        x = values.get(v.name)
        if x is None:
            x = 0 if v.bounds is None else min(max(0, v.bounds[0]), v.bounds[1])
        out.append((v.name, Fraction(x)))
    return tuple(out)


def _exists_ok(head: ExistsHead, clause: Clause, values, interp: _Interp) -> bool:
    bounds = _bounds(clause.all_vars())
    names = [v.name for v in clause.all_vars()]
    for _ in ground_points(head.atoms, head.constraint, names, bounds, interp, values):
        return True
    return False


def _check_ground(cid: str, clause: Clause, interp: _Interp) -> ClauseReport:
    bounds = _bounds(clause.universals)
    names = [v.name for v in clause.universals]
    for values in ground_points(clause.body, clause.constraint, names, bounds, interp):
        head = clause.head
        if isinstance(head, FalseHead):
            ok = False
        elif isinstance(head, PredicateAtom):
            ok = interp.holds(head, values)
        else:
            ok = _exists_ok(head, clause, values, interp)
        if not ok:
            return ClauseReport(cid, False, _witness(values, clause))
    return ClauseReport(cid, True)


def _check_symbolic(cid: str, clause: Clause, interp: _Interp) -> ClauseReport:
    head = clause.head
    head_f = FALSE if isinstance(head, FalseHead) else interp.formula(head)
    f = conj([interp.formula(a) for a in clause.body] + [clause.constraint, negate(head_f)])
    res = sat(f, clause.int_vars(), clause.bounds())
    if res:
        return ClauseReport(cid, False, _witness(res.assignment, clause))
    return ClauseReport(cid, True)


def check_clause(hs: HornSystem, index: int, model: Model, interp: _Interp | None = None
                 ) -> ClauseReport:
    interp = interp or _Interp(hs, model)
    clause = hs.clauses[index]
    cid = hs.clause_id(index)
    bounded = _bounds(clause.all_vars()) is not None
    uses_table = any(interp.table(a.pred) is not None
                     for a in clause.body + clause.head_atoms())
    try:
        if clause.has_exists:
            if not bounded:
                return ClauseReport(cid, False, reason="existential heads are only checked over "
                                                       "bounded integer variables")
            return _check_ground(cid, clause, interp)
        if uses_table and bounded:
            return _check_ground(cid, clause, interp)
        try:
            return _check_symbolic(cid, clause, interp)
        except ResourceError:
            if not bounded or box_size(clause.bounds()) > get_caps().box:
                raise
            return _check_ground(cid, clause, interp)
    except ResourceError as exc:
        return ClauseReport(cid, False, reason=f"resource limit: {exc}")


def check_model(hs: HornSystem, model: Model) -> list[ClauseReport]:
    """One report per clause, then one per well-foundedness mark."""
    interp = _Interp(hs, model)
    reports = [check_clause(hs, i, model, interp) for i in range(len(hs.clauses))]
    for mark in hs.wf_marks:
        cid = f"wf({mark.pred})"
        rank = model.ranks.get(mark.pred)
        if rank is None:
            reports.append(ClauseReport(cid, False, reason="no rank witness"))
            continue
        pred = hs.predicate(mark.pred)
        ints = frozenset(p.name for p in pred.params if p.is_int)
        bounds = {p.name: p.bounds for p in pred.params if p.bounds is not None}
        try:
            ok = check_rank(model.interp[mark.pred], rank, ints, bounds)
        except ResourceError as exc:
            reports.append(ClauseReport(cid, False, reason=f"resource limit: {exc}"))
            continue
        reports.append(ClauseReport(cid, ok, reason="" if ok else "rank is not bounded and "
                                                                   "decreasing"))
    return reports


def certify_model(hs: HornSystem, model: Model) -> tuple[bool, list]:
    """``(all clauses hold, [(clause index, counterwitness)...])``."""
    reports = check_model(hs, model)
    failures = [(i, dict(r.witness)) for i, r in enumerate(reports[:len(hs.clauses)])
                if not r.holds and r.witness is not None]
    return all(r.holds for r in reports), failures


def model_holds(hs: HornSystem, model: Model) -> bool:
    return all(r.holds for r in check_model(hs, model))


# --- refutations ------------------------------------------------------------

def _in_domain(clause: Clause, values: Mapping[str, Fraction]) -> bool:
    for v in clause.universals:
        x = values.get(v.name)
        if x is None:
            return False
        if v.is_int and Fraction(x).denominator != 1:
            return False
        if v.bounds is not None and not v.bounds[0] <= x <= v.bounds[1]:
            return False
    return True


def derived_fact(hs: HornSystem, d: Derivation, _depth: int = 0):
    """Replay ``d``; returns ``(pred, args)`` it derives, ``"false"``, or None if invalid."""
    if not isinstance(d, Derivation) or not 0 <= d.clause < len(hs.clauses) or _depth > 100_000:
        return None
    clause = hs.clauses[d.clause]
    if clause.has_exists:
        return None
    values = d.values
    if not _in_domain(clause, values) or not evaluate(clause.constraint, values):
        return None
    if len(d.children) != len(clause.body):
        return None
    for atom, child in zip(clause.body, d.children):
        fact = derived_fact(hs, child, _depth + 1)
        if fact is None or fact == "false":
            return None
        pred, args = fact
        if pred != atom.pred or args != tuple(values[a] for a in atom.args):
            return None
    if isinstance(clause.head, FalseHead):
        return "false"
    return clause.head.pred, tuple(values[a] for a in clause.head.args)


def check_derivation(hs: HornSystem, d: Derivation | None) -> bool:
    """True iff ``d`` is a ground refutation: a valid tree whose root head is false."""
    if d is None:
        return False
    try:
        return derived_fact(hs, d) == "false"
    except (KeyError, TypeError):
        return False


def check_lasso(hs: HornSystem, ev: LassoEvidence) -> bool:
    """Derived facts of a wf-marked predicate forming a cycle of states."""
    if not ev.derivations:
        return False
    edges = []
    for d in ev.derivations:
        fact = derived_fact(hs, d)
        if fact is None or fact == "false" or fact[0] not in hs.wf_preds:
            return False
        edges.append(fact)
    if len({p for p, _ in edges}) != 1:
        return False
    half = len(edges[0][1]) // 2
    for (_, a), (_, b) in zip(edges, edges[1:] + edges[:1]):
        if a[half:] != b[:half]:
            return False
    return True


def _exists_clause(hs: HornSystem, inv: str) -> tuple[int, Clause] | None:
    found = [(i, c) for i, c in enumerate(hs.clauses)
             if c.has_exists and c.body and c.body[0].pred == inv]
    return found[0] if len(found) == 1 else None


def check_closed_set(hs: HornSystem, ev: ClosedSetEvidence) -> bool:
    """Validate a set of states that every model's ``inv`` must avoid, yet must meet.

    Requirements: some init clause puts a member of the set into ``inv``; for
    each member, a query clause with body ``inv`` fires, or the chosen extra
    universals make the existential clause applicable while every witness lands
    back in the set. Each step from such a member also enters the wf-marked
    relation, so a model would need an infinite descending chain.
    """
    try:
        inv = hs.predicate(ev.inv)
    except KeyError:
        return False
    states = set(map(tuple, ev.states))
    if not states or any(len(s) != inv.arity for s in states):
        return False
    init_hit = False
    queries = []
    for c in hs.clauses:
        if not c.body and isinstance(c.head, PredicateAtom) and c.head.pred == ev.inv:
            for s in states:
                values = dict(zip(c.head.args, s))
                if _ground_sat(c, c.constraint, values):
                    init_hit = True
                    break
        elif (isinstance(c.head, FalseHead) and len(c.body) == 1 and c.body[0].pred == ev.inv):
            queries.append(c)
    if not init_hit:
        return False
    found = _exists_clause(hs, ev.inv)
    if found is None:
        return False
    _, ex = found
    head = ex.head
    target = [a for a in head.atoms if a.pred == ev.inv]
    wf_atoms = [a for a in head.atoms if a.pred in hs.wf_preds]
    if len(target) != 1 or not wf_atoms:
        return False
    # each forced step must also be a step of the wf relation
    if not any(a.args == ex.body[0].args + target[0].args for a in wf_atoms):
        return False
    bounds = _bounds(ex.all_vars())
    if bounds is None:
        return False
    state_args = ex.body[0].args
    extra = [v.name for v in ex.universals if v.name not in state_args]
    choices = ev.choice_map()
    empty = _Interp(hs, Model({u.name: TRUE for u in hs.unknowns}))
    all_names = [v.name for v in ex.all_vars()]
    for s in sorted(states):
        base = dict(zip(state_args, s))
        if any(_ground_sat(q, q.constraint, dict(zip(q.body[0].args, s))) for q in queries):
            continue
        choice = choices.get(s, ())
        if len(choice) != len(extra):
            return False
        values = dict(base)
        values.update(zip(extra, choice))
        if not _in_domain(ex, values) or not evaluate(ex.constraint, values):
            return False
        for point in ground_points((), head.constraint, all_names, bounds, empty, values):
            nxt = tuple(point[a] for a in target[0].args)
            if nxt not in states:
                return False
    return True


def _ground_sat(clause: Clause, f: Formula, values: Mapping[str, int]) -> bool:
    bounds = _bounds(clause.universals)
    if bounds is None:
        return False
    names = [v.name for v in clause.universals]
    try:
        return PointSolver(f, names, bounds).exists(values)
    except KeyError:
        return False


def check_evidence(hs: HornSystem, evidence) -> bool:
    if isinstance(evidence, Derivation):
        return check_derivation(hs, evidence)
    if isinstance(evidence, LassoEvidence):
        return check_lasso(hs, evidence)
    if isinstance(evidence, ClosedSetEvidence):
        return check_closed_set(hs, evidence)
    return False
