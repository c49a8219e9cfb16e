import pytest

from horn_forge import corpus
from horn_forge.errors import InputError
from horn_forge.formula import evaluate
from horn_forge.program import (format_program, load_program, parse_formula, parse_program,
                                rename, validate_for)

P1 = "var x: int[0,20]; init: x = 0; next: x < 10 && x' = x + 1; safe: x <= 10;"


def test_parse_p1():
    ts = parse_program(P1)
    assert ts.names == ["x"]
    assert sorted(ts.assertions) == ["init", "next", "safe"]
    assert ts.var("x").bounds == (0, 20)
    assert ts.is_bounded


def test_system_block_form():
    ts = parse_program("system s { var y: int; init: y = 1; next: y' = y; }")
    assert ts.name == "s" and not ts.is_bounded


def test_rational_sort():
    ts = parse_program("var r: rat; init: r = 1/2; next: r' = r + 1/2;")
    assert not ts.var("r").is_int
    assert evaluate(ts["init"], {"r": 0.5})


def test_primed_variable_outside_relation_rejected():
    with pytest.raises(InputError, match="primed"):
        parse_program("var x: int; init: x = 0; safe: x' <= 1;")


def test_missing_semicolon_names_line():
    with pytest.raises(InputError, match="line 2"):
        parse_program("var x: int\ninit: x = 0;")


@pytest.mark.parametrize("text", [
    "var x: int; init: y = 0;",                  # undeclared variable
    "var x: int; var x: int; init: x = 0;",      # duplicate declaration
    "var x: int; init: x = 0; init: x = 1;",     # duplicate role
    "var x: int[3,1]; init: x = 0;",             # empty bounds
    "var x: int; bogus: x = 0;",                 # unknown role
    "var x: int; init: x * x = 0;",              # nonlinear
])
def test_input_errors(text):
    with pytest.raises(InputError):
        parse_program(text)


def test_rename_examples():
    assert rename(parse_formula("x = 0"), {"x": "x'"}) == parse_formula("x' = 0")
    nxt = parse_program(P1)["next"]
    assert rename(nxt, {"x": "w", "x'": "w'"}) == parse_formula("w < 10 && w' = w + 1")
    assert rename(nxt, {}) == nxt


def test_validate_for():
    ts = parse_program(P1)
    assert validate_for(ts, "safety-fwd") == []
    assert sorted(validate_for(ts, "exists-until")) == ["p", "q"]
    assert sorted(validate_for(ts, "reach-game")) == ["env", "goal"]
    with pytest.raises(InputError):
        validate_for(ts, "liveness")


@pytest.mark.parametrize("name", corpus.names())
def test_print_parse_round_trip(name):
    ts = load_program(corpus.path(name))
    assert parse_program(format_program(ts), ts.name) == ts


def test_load_missing_file(tmp_path):
    with pytest.raises(InputError):
        load_program(tmp_path / "absent.ts")
