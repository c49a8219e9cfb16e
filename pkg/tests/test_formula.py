import itertools
import random
import sys
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

import helpers  # noqa: E402
from horn_forge.caps import get_caps, set_caps  # noqa: E402
from horn_forge.errors import InputError, ResourceError  # noqa: E402
from horn_forge.formula import (EQ, FALSE, GE, GT, TRUE, Atom, LinConstraint, LinTerm,  # noqa: E402
                                Or, PointSolver, bounds_of, conj, counterexample, dnf,
                                eliminate, evaluate, int_sat, negate, nnf, sat, sat_cube,
                                tighten, valid)
from horn_forge.program import parse_formula  # noqa: E402

x, y, z = LinTerm.var("x"), LinTerm.var("y"), LinTerm.var("z")


def ge(t):
    return LinConstraint(t, GE)


# --- terms and constraints ------------------------------------------------------

def test_constraint_canonical_scaling_identifies_multiples():
    assert ge(2 * x - 4) == ge(x - 2)
    assert LinConstraint(2 * x - 4, EQ) == LinConstraint(-x + 2, EQ)


def test_constraint_holds_exactly():
    c = LinConstraint(3 * x - 1, GT)
    assert not c.holds({"x": Fraction(1, 3)})
    assert c.holds({"x": Fraction(1, 2)})


# --- nnf --------------------------------------------------------------------------

def test_nnf_negated_le_becomes_strict():
    assert parse_formula("!(x <= 3)") == Atom(LinConstraint(x - 3, GT))


def test_nnf_negated_equality_splits():
    f = parse_formula("!(x = 0)")
    assert f == Or((Atom(LinConstraint(x, GT)), Atom(LinConstraint(-x, GT))))


def test_nnf_de_morgan():
    assert parse_formula("!(x >= 1 && y >= 1)") == parse_formula("x < 1 || y < 1")


def test_nnf_is_idempotent_on_nnf_input():
    f = parse_formula("x >= 1 && (y = 2 || z < 0)")
    assert nnf(f) == f


def test_nonlinear_term_rejected():
    with pytest.raises(InputError):
        parse_formula("x * y >= 1")


# --- dnf ----------------------------------------------------------------------------

def test_dnf_examples():
    a, b, c = ge(x), ge(y), ge(z)
    assert dnf(Atom(a)) == [(a,)]
    assert dnf(conj(Or((Atom(a), Atom(b))), Atom(c))) == [(a, c), (b, c)]
    assert dnf(TRUE) == [()]
    assert dnf(FALSE) == []


def test_dnf_cap_raises():
    f = conj(parse_formula(f"v{i} >= 0 || v{i} <= -1") for i in range(13))
    with pytest.raises(ResourceError):
        dnf(f)


# --- sat_cube -------------------------------------------------------------------------

def test_sat_cube_contradiction_has_unit_multipliers():
    cube = [ge(x - 1), ge(-x)]
    result = sat_cube(cube)
    assert not result
    assert dict(result.certificate.multipliers) == {0: 1, 1: 1}
    assert helpers.farkas_resum(result.certificate, cube)
    assert result.certificate.verify(cube)


def test_sat_cube_point_equation():
    assert sat_cube([LinConstraint(x, EQ)]).assignment == {"x": 0}


def test_sat_cube_three_constraints():
    # Eliminating y gives 2x >= 4 with x <= 2, forcing x = 2; then y in [1, 1].
    result = sat_cube([ge(x + y - 3), ge(x - y - 1), ge(-x + 2)])
    assert result.assignment == {"x": 2, "y": 1}


def test_sat_cube_strict_cycle_unsat():
    cube = [LinConstraint(x - y, GT), LinConstraint(y - x, GE)]
    result = sat_cube(cube)
    assert not result and helpers.farkas_resum(result.certificate, cube)


def test_sat_cube_fractional_model():
    result = sat_cube([LinConstraint(2 * x - 1, EQ)])
    assert result.assignment == {"x": Fraction(1, 2)}


cubes = st.lists(
    st.tuples(st.lists(st.integers(-3, 3), min_size=3, max_size=3), st.integers(-6, 6),
              st.sampled_from([GE, GT, EQ])),
    min_size=1, max_size=6)


def _build(rows):
    return [LinConstraint(LinTerm.of(dict(zip("xyz", k)), c), rel) for k, c, rel in rows]


@settings(max_examples=150, deadline=None)
@given(cubes)
def test_sat_cube_answers_are_checkable(rows):
    cube = _build(rows)
    result = sat_cube(cube)
    if result:
        assert all(helpers.holds(c, result.assignment) for c in cube)
    else:
        assert helpers.farkas_resum(result.certificate, cube)


@settings(max_examples=100, deadline=None)
@given(cubes)
def test_eliminate_is_exact_projection(rows):
    cube = _build(rows)
    projected = eliminate(["z"], cube)
    assert all("z" not in c.variables() for c in projected)
    grid = [Fraction(k, 2) for k in range(-6, 7)]
    for a, b in itertools.product(grid, grid):
        env = {"x": a, "y": b}
        assert all(helpers.holds(c, env) for c in projected) == \
            helpers.interval_feasible(cube, "z", env)


def test_fm_projection_against_integer_grid():
    # Integer-grid check over [-5, 5]: every integer model projects into the result.
    rng = random.Random(118)
    for _ in range(40):
        cube = helpers.random_cube(rng, ["x", "y", "z"], rows=3)
        projected = eliminate(["y", "z"], cube)
        for a, b, c in itertools.product(range(-5, 6), repeat=3):
            env = {"x": a, "y": b, "z": c}
            if all(helpers.holds(k, env) for k in cube):
                assert all(helpers.holds(k, {"x": a}) for k in projected)


# --- eliminate ----------------------------------------------------------------------

def test_eliminate_single_pairing():
    assert eliminate(["y"], [ge(x - y), ge(y - 1)]) == (ge(x - 1),)


def test_eliminate_to_true():
    assert eliminate(["x"], [ge(x)]) == ()


def test_eliminate_infeasible_projects_to_false():
    (c,) = eliminate(["y"], [ge(y - 1), ge(-y)])
    assert not c.variables() and not c.holds({})


def test_fm_cap_raises():
    old = get_caps()
    set_caps(replace(old, fm=3))
    try:
        rows = [ge(LinTerm.of({"x": 1, v: s}, 0)) for v in "abcd" for s in (1, -1)]
        with pytest.raises(ResourceError):
            eliminate(["a", "b", "c", "d"], rows)
    finally:
        set_caps(old)


# --- integer layer ----------------------------------------------------------------------

def test_int_sat_no_integer_solution():
    assert not int_sat([LinConstraint(2 * x - 1, EQ)], {"x": (0, 1)})


def test_int_sat_point():
    assert int_sat([ge(x), ge(-x)], {"x": (-3, 3)}).assignment == {"x": 0}


def test_int_sat_diophantine():
    result = int_sat([LinConstraint(3 * x - 2 * y - 1, EQ), ge(x + y - 4)],
                     {"x": (0, 10), "y": (0, 10)})
    assert result.assignment == {"x": 3, "y": 4}
    scan = [(a, b) for a in range(11) for b in range(11) if 3 * a - 2 * b == 1 and a + b >= 4]
    assert (3, 4) in scan


def test_tighten_rounds_strict_integer_constraints():
    assert tighten(LinConstraint(2 * x - 3, GT), {"x"}) == ge(x - 2)


def test_point_solver_enumerates_box():
    solver = PointSolver(parse_formula("x + y = 3 && x >= 1"), ["x", "y"],
                         {"x": (0, 3), "y": (0, 3)})
    assert sorted(solver.solutions()) == [(1, 2), (2, 1), (3, 0)]
    assert solver.exists({"x": 2}) and not solver.exists({"x": 0})


def test_bounds_of():
    assert bounds_of(x + y, [ge(x), ge(2 - x), LinConstraint(y - 1, EQ)]) == (1, 3)
    assert bounds_of(x, [ge(x - 1), ge(-x)]) is None
    assert bounds_of(x, [ge(x)]) == (0, None)


# --- sat / valid -------------------------------------------------------------------------

def test_sat_examples():
    assert not sat(FALSE)
    result = sat(parse_formula("x != 0"))
    assert result and result.assignment["x"] != 0


def test_valid_examples():
    assert valid(parse_formula("x >= 0 || x <= 0"))
    assert not valid(parse_formula("x >= 0"))
    assert counterexample(parse_formula("x >= 0")) == {"x": -1}
    assert valid(parse_formula("x != 0 || x <= 10"))
    assert valid(negate(conj(parse_formula("x = 0"), parse_formula("x > 10"))))


def test_valid_uses_integer_sorts():
    f = parse_formula("x <= 0 || x >= 1")
    assert not valid(f)
    assert valid(f, int_vars={"x"})


def test_evaluate():
    f = parse_formula("x < 10 && x' = x + 1")
    assert evaluate(f, {"x": 3, "x'": 4})
    assert not evaluate(f, {"x": 10, "x'": 11})
