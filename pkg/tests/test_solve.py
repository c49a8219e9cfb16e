import dataclasses

import pytest
from sklearn.base import clone

from horn_forge import corpus
from horn_forge.certify import check_derivation, model_holds, oracle
from horn_forge.formula import FALSE, conj, evaluate, sat
from horn_forge.generate import SchemaConfig, generate
from horn_forge.model import Refuted, Solved, Unknown, format_model
from horn_forge.program import parse_formula, parse_program
from horn_forge.solve import (Budget, GroundEngine, HornSolver, affine_equalities, bmc,
                              farkas_templates, grid_atoms, hull_formula, kleene_intervals,
                              solve)


def fwd(name, schema="safety-fwd"):
    entry = corpus.load(name)
    return generate(entry.ts, schema, entry.config())


# --- bounded unrolling --------------------------------------------------------

def test_bmc_finds_p2_counterexample_at_height_11():
    d = bmc(fwd("p2"), 11)
    assert d is not None and d.height == 11
    assert check_derivation(fwd("p2"), d)
    assert d.values == {"x": 10}


def test_bmc_too_shallow():
    assert bmc(fwd("p2"), 5) is None


def test_bmc_safe_system():
    assert bmc(fwd("p1"), 50) is None


def test_bmc_rational_system_is_symbolic():
    ts = parse_program("var r: rat; init: r = 0; next: r' = r + 1/2; safe: r <= 9;")
    d = bmc(generate(ts, "safety-fwd"), 25)
    assert d is not None and d.height == 20
    assert check_derivation(generate(ts, "safety-fwd"), d)


def test_ground_engine_least_model():
    engine = GroundEngine(fwd("p1"))
    assert engine.run() is None
    assert engine.least_model()["inv"] == {(i,) for i in range(11)}


# --- intervals ------------------------------------------------------------------

def test_intervals_p1_exact():
    hs = fwd("p1")
    assert format_model(hs, kleene_intervals(hs)) == "inv := x >= 0 && x <= 10;\n"


def test_intervals_too_coarse_for_non_convex_safety():
    ts = parse_program("var x: int[0,20]; init: x = 0 || x = 10; "
                       "next: (x = 0 && x' = 0) || (x = 10 && x' = 10); safe: x != 5;")
    assert kleene_intervals(generate(ts, "safety-fwd")) is None
    assert oracle(ts, "safety").holds


def test_intervals_empty_init_gives_bottom():
    ts = parse_program("var x: int[0,20]; init: false; next: x' = x + 1; safe: x <= 3;")
    assert kleene_intervals(generate(ts, "safety-fwd")).interp == {"inv": FALSE}


def test_intervals_widen_unbounded_counter():
    ts = parse_program("var x: int; init: x = 0; next: x' = x + 1; safe: x >= 0;")
    model = kleene_intervals(generate(ts, "safety-fwd"))
    assert model is not None and str(model["inv"]) == "x >= 0"


# --- templates ---------------------------------------------------------------------

def test_grid_atoms_are_distinct():
    atoms = grid_atoms(["x"], (-1, 0, 1), 2)
    assert len(atoms) == len(set(atoms))
    assert parse_formula("x <= 2") in atoms


def test_templates_p1():
    hs = fwd("p1")
    model = farkas_templates(hs)
    assert model is not None and model_holds(hs, model)


def test_templates_constant_grid_fails():
    assert farkas_templates(fwd("p1"), Budget(grid=(0,))) is None


def test_templates_need_coefficient_three():
    ts = parse_program("var x: int; var y: int; init: x = 0 && y = 0; "
                       "next: x' = x + 1 && y' = y + 3; safe: y <= 3 * x;")
    assert farkas_templates(generate(ts, "safety-fwd")) is None
    assert farkas_templates(generate(ts, "safety-fwd"), Budget(grid=(-3, -1, 0, 1, 3))) \
        is not None


# --- hull ---------------------------------------------------------------------------

def test_affine_equalities_on_line():
    eqs = affine_equalities(["x", "y"], [(0, 0), (1, 1), (5, 5)])
    assert eqs == [parse_formula("x = y")]


def test_hull_formula_contains_points():
    pts = [(0, 1), (2, 3), (1, 2)]
    f = hull_formula(["a", "b"], pts)
    assert all(evaluate(f, {"a": a, "b": b}) for a, b in pts)
    assert not evaluate(f, {"a": 3, "b": 4})
    assert hull_formula(["a"], []) == FALSE


# --- portfolio ------------------------------------------------------------------------

def test_solve_p1_safe():
    verdict = solve(fwd("p1"))
    assert isinstance(verdict, Solved) and model_holds(fwd("p1"), verdict.model)


def test_solve_p2_refuted():
    verdict = solve(fwd("p2"))
    assert isinstance(verdict, Refuted) and verdict.derivation.height == 11


def test_solve_p4_termination_never_solved():
    assert not isinstance(solve(fwd("p4", "termination")), Solved)


def test_solve_unbounded_nonterminating_is_unknown():
    ts = parse_program("var x: int; init: x = 0; next: x' = x + 1; safe: x >= 0;")
    verdict = solve(generate(ts, "termination"), Budget(time=10))
    assert isinstance(verdict, Unknown)
    assert dict(verdict.spent)["invariant"] == "intervals"


def test_solve_combined_yields_disjoint_sets():
    hs = fwd("p1", "safety-comb")
    verdict = solve(hs)
    assert isinstance(verdict, Solved)
    both = conj(verdict.model["inv"], verdict.model["binv"])
    assert not sat(both, int_vars={"x"}, bounds={"x": (0, 20)})


@pytest.mark.parametrize("name,strategy", [("p1", "ranking"), ("p4", "lasso")])
def test_solve_termination(name, strategy):
    verdict = solve(fwd(name, "termination"))
    assert verdict.strategy == strategy


def test_determinism_same_verdict_and_certificate():
    for name, schema in [("p2", "safety-fwd"), ("line", "safety-comb"), ("p4", "termination")]:
        a, b = solve(fwd(name, schema)), solve(fwd(name, schema))
        assert a == b


def test_parallel_mode_agrees():
    for name in ("p1", "p2", "line"):
        seq = solve(fwd(name))
        par = solve(fwd(name), Budget(deterministic=False))
        assert seq.status == par.status


def test_horn_solver_estimator():
    est = HornSolver(depth=12)
    assert est.get_params()["depth"] == 12
    est.fit(fwd("p2"))
    assert est.status_ == "REFUTED" and est.model_ is None
    assert est.predict(fwd("p1")) == "SOLVED"
    other = clone(est).set_params(depth=3)
    assert other.budget() == dataclasses.replace(Budget(), depth=3)


def test_literal_backward_rejects_safe_system():
    # A safe but unreachable state (x = 5) can step into the unsafe region.
    ts = parse_program("var x: int[0,20]; init: x = 0; next: x >= 5 && x' = x + 1; "
                       "safe: x <= 10;")
    assert oracle(ts, "safety").holds
    assert isinstance(solve(generate(ts, "safety-bwd")), Solved)
    literal = solve(generate(ts, "safety-bwd", SchemaConfig("literal")))
    assert isinstance(literal, Refuted)
