import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import helpers  # noqa: E402
from horn_forge import corpus  # noqa: E402
from horn_forge.errors import InputError  # noqa: E402
from horn_forge.formula import EQ, GE, LinConstraint, LinTerm, cube_formula, dnf, valid  # noqa: E402
from horn_forge.program import parse_formula  # noqa: E402
from horn_forge.wf import (AffineRank, LexRank, RankingSynthesizer, TableRank,  # noqa: E402
                           check_rank, lex_synthesize, pr_synthesize, synthesize)

INTS = frozenset({"x", "x'", "y", "y'"})
x = LinTerm.var("x")


def test_check_rank_examples():
    rnd = parse_formula("x >= 1 && x' = x - 1")
    assert check_rank(rnd, AffineRank(x))
    assert not check_rank(rnd, AffineRank(-x))


def test_check_rank_upper_bounded_climb():
    rnd = parse_formula("x' = x + 1 && x <= 100")
    rank = AffineRank(LinTerm.const(100) - x)
    # Independent confirmation of both proof obligations.
    assert valid(parse_formula("!(x' = x + 1 && x <= 100) || 100 - x >= 0"))
    assert valid(parse_formula("!(x' = x + 1 && x <= 100) || (100 - x) - (100 - x') >= 1"))
    assert check_rank(rnd, rank)


def test_check_rank_rejects_unbounded_rank():
    assert not check_rank(parse_formula("x' = x - 1"), AffineRank(x))


def test_check_rank_lexicographic():
    rnd = parse_formula("(x >= 1 && x' = x - 1 && y' = y + 7) || "
                        "(x <= 0 && x' = x && y >= 1 && y' = y - 1)")
    assert check_rank(rnd, LexRank((AffineRank(x), AffineRank(LinTerm.var("y")))), INTS)
    assert not check_rank(rnd, LexRank((AffineRank(LinTerm.var("y")), AffineRank(x))), INTS)


def test_check_rank_table():
    rnd = parse_formula("(x = 2 && x' = 1) || (x = 1 && x' = 0)")
    assert check_rank(rnd, TableRank.of(["x"], {(2,): 2, (1,): 1, (0,): 0}),
                      bounds={"x": (0, 2), "x'": (0, 2)})
    assert not check_rank(rnd, TableRank.of(["x"], {(2,): 1, (1,): 1, (0,): 0}),
                          bounds={"x": (0, 2), "x'": (0, 2)})


def test_pr_synthesize_simple():
    rel = [LinConstraint(x - 1, GE), LinConstraint(x - LinTerm.var("x'") - 1, GE)]
    rank = pr_synthesize(rel, ["x"])
    assert rank is not None and check_rank(cube_formula(tuple(rel)), rank)


def test_pr_synthesize_reflexive_none():
    assert pr_synthesize([LinConstraint(LinTerm.var("x'") - x, EQ)], ["x"]) is None


def test_pr_synthesize_rejects_disjunction():
    with pytest.raises(InputError):
        pr_synthesize(parse_formula("x' = x - 1 || x' = x - 2"), ["x"])


@pytest.mark.parametrize("seed", range(50))
def test_pr_synthesize_random_rankable(seed):
    rel = helpers.rankable_relation(random.Random(1000 + seed))
    rank = pr_synthesize(rel, ["x", "y"], INTS)
    assert rank is not None
    assert check_rank(cube_formula(tuple(rel)), rank, INTS)


def test_pr_synthesize_uses_integer_tightening():
    # Over the rationals the drop is only 1/2; on integers it is at least 1.
    rel = parse_formula("x > 0 && 2*x' <= 2*x - 1")
    assert pr_synthesize(rel, ["x"], frozenset({"x", "x'"})) is not None


def test_lex_two_phase():
    ts = corpus.load("two_phase").ts
    cubes = dnf(ts["next"])
    lex = lex_synthesize(cubes, ["x", "y"], INTS)
    assert lex is not None and len(lex.components) == 2
    for c in cubes:
        assert check_rank(cube_formula(c), lex, INTS)


def test_lex_single_disjunct_degenerates():
    rel = dnf(parse_formula("x >= 1 && x' = x - 1"))
    lex = lex_synthesize(rel, ["x"])
    assert lex is not None and len(lex.components) == 1


def test_lex_cycle_none():
    rel = dnf(parse_formula("(x >= 0 && x' = x) || (x >= 1 && x' = x - 1)"))
    assert lex_synthesize(rel, ["x"]) is None


def test_synthesize_picks_affine_when_possible():
    assert isinstance(synthesize(parse_formula("x >= 1 && x' = x - 1"), ["x"]), AffineRank)


def test_estimator():
    est = RankingSynthesizer(vars=["x"], int_vars=("x", "x'"))
    est.fit(parse_formula("x >= 1 && x' = x - 1"))
    values = est.predict([{"x": 5}, {"x": 4}])
    assert values[0] - values[1] == 1
    with pytest.raises(InputError):
        RankingSynthesizer(vars=["x"]).fit(
            [LinConstraint(LinTerm.var("x'") - x, EQ)]).predict([{"x": 0}])
