"""Portfolio driver: dispatch on the fragment, certify before answering."""
from __future__ import annotations

import dataclasses
from concurrent.futures import FIRST_COMPLETED, ThreadPoolExecutor, wait

from ..base import BaseEstimator, check_horn_system, check_is_fitted
from ..certify import certify_model, check_derivation, check_evidence
from ..errors import BudgetExceeded, HornForgeError, ResourceError, UnsupportedFragment
from ..formula import (EQ, FALSE, LinConstraint, LinTerm, conj, cube_formula, disj, dnf,
                       eliminate, rename, sat_cube)
from ..horn import HornSystem
from ..model import Derivation, LassoEvidence, Model, Refuted, Solved, Unknown, as_table
from ..wf import TableRank, synthesize
from .bmc import SymbolicUnroller, make_unroller
from .budget import Budget, Deadline
from .ground import GroundEngine, is_ground_solvable
from .hull import hull_formula
from .intervals import kleene_intervals
from .templates import farkas_templates


# --- certification helpers --------------------------------------------------

def _solved(hs, model, strategy):
    if model is None:
        return None
    ok, _ = certify_model(hs, model)
    return Solved(model, strategy) if ok else None


def _refuted(hs, derivation, strategy):
    if derivation is not None and check_derivation(hs, derivation):
        return Refuted(derivation, strategy)
    return None


# --- recursion-only fragment ------------------------------------------------

class _Recursive:
    """Shared state of the strategies: one unroller, reused across depths."""

    def __init__(self, hs: HornSystem, budget: Budget, deadline: Deadline):
        self.hs, self.budget, self.deadline = hs, budget, deadline
        self.unroller = make_unroller(hs, deadline)
        self.unroll_capped = False
        self.tried: list[str] = []

    def bmc(self, k: int):
        self.tried.append(f"bmc<={k}")
        if self.unroll_capped:
            return None
        try:
            d = self.unroller.run(k)
        except ResourceError:
            self.unroll_capped = True
            return None
        return _refuted(self.hs, d, "bmc")

    def intervals(self):
        self.tried.append("intervals")
        try:
            model = kleene_intervals(self.hs, self.budget, self.deadline)
        except (ResourceError, UnsupportedFragment) as exc:
            if isinstance(exc, BudgetExceeded):
                raise
            return None
        return _solved(self.hs, model, "intervals")

    def templates(self):
        self.tried.append("farkas")
        must = None
        if isinstance(self.unroller, GroundEngine):
            must = {p: set(f) for p, f in self.unroller.facts.items()}
        try:
            model = farkas_templates(self.hs, self.budget, self.deadline, must,
                                     lambda m: certify_model(self.hs, m))
        except ResourceError as exc:
            if isinstance(exc, BudgetExceeded):
                raise
            return None
        return None if model is None else Solved(model, "farkas")

    def fixpoint(self):
        """Run the unroller to saturation; summarize the least model it found."""
        self.tried.append("fixpoint")
        if self.unroll_capped:
            return None
        symbolic = isinstance(self.unroller, SymbolicUnroller)
        try:
            d = self.unroller.run(self.budget.iterations if symbolic else None)
        except ResourceError:
            self.unroll_capped = True
            return None
        if d is not None:
            return _refuted(self.hs, d, "fixpoint")
        if not self.unroller.complete:
            return None
        if isinstance(self.unroller, GroundEngine):
            facts = self.unroller.least_model()
            hull = Model({p.name: hull_formula(p.param_names, facts[p.name])
                          for p in self.hs.unknowns})
            verdict = _solved(self.hs, hull, "hull")
            if verdict is not None:
                return verdict
            return _solved(self.hs, least_table_model(self.hs, facts), "explicit")
        return _solved(self.hs, symbolic_fixpoint_model(self.hs, self.unroller), "fixpoint")

    def stages(self):
        depth = self.budget.depth
        return [lambda: self.bmc(min(5, depth)), self.intervals,
                lambda: self.bmc(min(10, depth)), self.templates,
                lambda: self.bmc(depth), self.fixpoint]

    def spent(self):
        return (("unroll_depth", max(self.unroller.level, 0)),
                ("strategies", ",".join(self.tried)))


def least_table_model(hs: HornSystem, facts) -> Model:
    from ..model import table_formula
    return Model({p.name: table_formula(p.param_names, facts.get(p.name, ()))
                  for p in hs.unknowns})


def symbolic_fixpoint_model(hs: HornSystem, unroller: SymbolicUnroller) -> Model:
    interp = {}
    for p in hs.unknowns:
        back = {f"#p{i}": n for i, n in enumerate(p.param_names)}
        interp[p.name] = disj(rename(cube_formula(f.cube), back)
                              for f in unroller.facts[p.name])
    return Model(interp)


def _sequential(run: _Recursive):
    for stage in run.stages():
        verdict = stage()
        if verdict is not None:
            return verdict
    return None


def _parallel(hs: HornSystem, budget: Budget, deadline: Deadline):
    """Independent strategy instances in threads; the first certified verdict wins."""
    def task(name):
        own = _Recursive(hs, budget, deadline)
        if name == "bmc":
            return own.bmc(budget.depth) or own.fixpoint()
        if name == "templates":
            own.bmc(min(5, budget.depth))
        return getattr(own, name)()

    names = ["bmc", "intervals", "templates"]
    with ThreadPoolExecutor(max_workers=len(names)) as pool:
        pending = {pool.submit(task, n) for n in names}
        try:
            while pending:
                done, pending = wait(pending, return_when=FIRST_COMPLETED)
                for fut in done:
                    try:
                        verdict = fut.result()
                    except HornForgeError:
                        continue
                    if verdict is not None:
                        return verdict
        finally:
            deadline.cancel.set()
    return None


def solve_recursive(hs: HornSystem, budget: Budget, deadline: Deadline):
    run = _Recursive(hs, budget, deadline)
    if budget.deterministic:
        verdict = _sequential(run)
    else:
        verdict = _parallel(hs, budget, deadline)
    return verdict or Unknown("no strategy produced a certified answer", run.spent())


# --- well-foundedness -------------------------------------------------------

def _remap(d: Derivation, index: list[int]) -> Derivation:
    return Derivation(index[d.clause], d.assignment, tuple(_remap(c, index) for c in d.children))


def _least_interp(hs: HornSystem, model: Model, pred: str):
    """Strongest interpretation of ``pred`` allowed by its defining clauses under ``model``."""
    params = hs.predicate(pred).param_names
    parts = []
    for _, c in hs.clauses_defining(pred):
        body = conj([model.instantiate(hs, a) for a in c.body] + [c.constraint])
        head = c.head
        tmp = [f"#h{i}" for i in range(len(params))]
        link = [LinConstraint(LinTerm.var(t) - LinTerm.var(a), EQ) for t, a in zip(tmp, head.args)]
        for cube in dnf(body):
            rows = list(cube) + link
            gone = {v for r in rows for v in r.variables()} - set(tmp)
            projected = eliminate(gone, rows)
            if sat_cube(projected):
                parts.append(rename(cube_formula(projected), dict(zip(tmp, params))))
    return disj(parts) if parts else FALSE


def _longest(edges: dict) -> dict:
    rank: dict = {}
    for start in sorted(edges):
        stack = [(start, iter(sorted(edges.get(start, ()))))]
        while stack:
            s, it = stack[-1]
            t = next(it, None)
            if t is None:
                stack.pop()
                rank[s] = 1 + max((rank[u] for u in edges.get(s, ())), default=-1)
            elif t not in rank:
                stack.append((t, iter(sorted(edges.get(t, ())))))
    return rank


def _cycle(edges: dict):
    color: dict = {}
    for root in sorted(edges):
        if root in color:
            continue
        color[root] = 1
        path = [root]
        stack = [iter(sorted(edges.get(root, ())))]
        while stack:
            t = next(stack[-1], None)
            if t is None:
                color[path.pop()] = 2
                stack.pop()
                continue
            if color.get(t) == 1:
                return path[path.index(t):]
            if t not in color:
                color[t] = 1
                path.append(t)
                stack.append(iter(sorted(edges.get(t, ()))))
    return None


def _explicit_wf(hs: HornSystem, deadline: Deadline):
    plain = dataclasses.replace(hs, wf_marks=())
    if not is_ground_solvable(plain):
        return None
    engine = GroundEngine(plain, deadline)
    d = engine.run()
    if d is not None:
        return _refuted(hs, d, "fixpoint")
    facts = engine.least_model()
    ranks = {}
    for w in sorted(hs.wf_preds):
        half = hs.predicate(w).arity // 2
        edges: dict = {}
        for f in sorted(facts[w]):
            edges.setdefault(f[:half], set()).add(f[half:])
            edges.setdefault(f[half:], set())
        loop = _cycle(edges)
        if loop is not None:
            pairs = [a + b for a, b in zip(loop, loop[1:] + loop[:1])]
            evidence = LassoEvidence(tuple(engine.facts[w][p] for p in pairs))
            return Refuted(evidence, "lasso") if check_evidence(hs, evidence) else None
        ranks[w] = TableRank.of(hs.predicate(w).param_names[:half], _longest(edges))
    model = least_table_model(hs, facts)
    model = Model(model.interp, ranks)
    return _solved(hs, model, "explicit")


def solve_wf(hs: HornSystem, budget: Budget, deadline: Deadline):
    wf = hs.wf_preds
    if any(a.pred in wf for c in hs.clauses for a in c.body):
        return Unknown("well-founded predicates in clause bodies are not supported")
    keep = [i for i, c in enumerate(hs.clauses) if not any(a.pred in wf for a in c.head_atoms())]
    sub = dataclasses.replace(hs, predicates=tuple(p for p in hs.predicates if p.name not in wf),
                              clauses=tuple(hs.clauses[i] for i in keep), wf_marks=())
    verdict = solve_recursive(sub, budget, deadline)
    if isinstance(verdict, Refuted):
        return _refuted(hs, _remap(verdict.evidence, keep), verdict.strategy) or \
            Unknown("refutation failed certification")
    if isinstance(verdict, Solved):
        model = verdict.model
        tabular = any(as_table(f, sub.predicate(p).param_names) is not None
                      and f not in (FALSE,) for p, f in model.interp.items())
        if not tabular:
            interp, ranks = dict(model.interp), {}
            for w in sorted(wf):
                pred = hs.predicate(w)
                interp[w] = _least_interp(hs, model, w)
                rank = synthesize(interp[w], pred.param_names[:pred.arity // 2],
                                  frozenset(p.name for p in pred.params if p.is_int))
                if rank is None:
                    break
                ranks[w] = rank
            else:
                found = _solved(hs, Model(interp, ranks), "ranking")
                if found is not None:
                    return found
    try:
        found = _explicit_wf(hs, deadline)
    except ResourceError as exc:
        if isinstance(exc, BudgetExceeded):
            raise
        found = None
    if found is not None:
        return found
    if isinstance(verdict, Unknown):
        return verdict
    tried = "ranking,explicit" if isinstance(verdict, Solved) else "explicit"
    return Unknown("no ranking function found and no explicit lasso available",
                   (("invariant", verdict.strategy), ("strategies", tried)))


# --- entry points -----------------------------------------------------------

def solve(hs: HornSystem, budget: Budget | None = None, deadline: Deadline | None = None):
    """Certified verdict for ``hs``; errors and exhausted budgets become Unknown."""
    budget = budget or Budget()
    deadline = deadline or Deadline(budget.time)
    try:
        check_horn_system(hs)
        if hs.has_exists:
            from ..game import solve as game_solve
            return game_solve(hs, budget, deadline)
        if hs.wf_marks:
            return solve_wf(hs, budget, deadline)
        return solve_recursive(hs, budget, deadline)
    except BudgetExceeded as exc:
        return Unknown(f"budget exhausted: {exc}")
    except (ResourceError, UnsupportedFragment) as exc:
        return Unknown(str(exc))


class HornSolver(BaseEstimator):
    """Estimator facade over :func:`solve`.

    ``fit(hs)`` sets ``verdict_``, ``status_`` and, when solved, ``model_``.
    """

    def __init__(self, depth=25, iterations=100, widening_delay=3, grid=(-2, -1, 0, 1, 2),
                 const_range=16, template_size=2, max_templates=50_000, time=30.0,
                 deterministic=True):
        self.depth = depth
        self.iterations = iterations
        self.widening_delay = widening_delay
        self.grid = grid
        self.const_range = const_range
        self.template_size = template_size
        self.max_templates = max_templates
        self.time = time
        self.deterministic = deterministic

    def budget(self) -> Budget:
        return Budget(**{f.name: getattr(self, f.name) for f in dataclasses.fields(Budget)})

    def fit(self, hs, y=None):
        self.verdict_ = solve(hs, self.budget())
        self.status_ = self.verdict_.status
        self.model_ = getattr(self.verdict_, "model", None)
        return self

    def predict(self, hs):
        """Verdict status (``SOLVED``, ``REFUTED`` or ``UNKNOWN``) for ``hs``."""
        return solve(hs, self.budget()).status

    def score(self, systems=None, y=None) -> float:
        check_is_fitted(self)
        return 0.0 if self.status_ == "UNKNOWN" else 1.0

