import pytest

from horn_forge import corpus, game
from horn_forge.certify import check_evidence, model_holds
from horn_forge.errors import ResourceError
from horn_forge.formula import FALSE
from horn_forge.generate import SchemaConfig, generate
from horn_forge.model import ClosedSetEvidence, Refuted, Solved
from horn_forge.program import parse_program
from horn_forge.wf import TableRank


def space_of(name):
    entry = corpus.load(name)
    return game.enumerate(entry.ts, sys_step=entry.sys_step)


def test_enumerate_p1():
    space = space_of("p1")
    assert len(space) == 21
    assert space.edges["next"] == {(i,): [(i + 1,)] for i in range(10)}
    assert space.sets["init"] == {(0,)}


def test_enumerate_rational_rejected():
    ts = parse_program("var r: rat; init: r = 0; next: r' = r + 1; p: r < 1; q: r = 1;")
    with pytest.raises(ResourceError):
        game.enumerate(ts)


def test_enumerate_p6_chain():
    space = space_of("p6")
    assert len(space) == 11
    assert space.edges["next"] == {(i,): [(i + 1,)] for i in range(10)}


def test_attractor_counts_every_opponent_choice():
    # 'a' needs both choices to lead into the target; 'b' has one bad choice.
    moves = {"a": [["t"], ["t", "c"]], "b": [["t"], ["c"]], "c": [["c"]]}
    dist = game.attractor(["a", "b", "c", "t"], {"c"}, moves)
    assert dist == {"t": 0, "a": 1}


def test_eu_p6_distances():
    space = space_of("p6")
    result = game.solve_eu(space)
    # Hand BFS backwards from the single q-state x = 5 along the chain.
    assert {s[0]: d for s, d in result.distance.items()} == {x: 5 - x for x in range(6)}
    assert result.solved
    assert game.extract_strategy(result) == {(x,): (x + 1,) for x in range(5)}
    assert game.replay(space, result)


def test_eu_unreachable_target():
    result = game.solve_eu(space_of("p6_unreach"))
    assert not result.solved and result.losing_init == [(0,)]


def test_eu_init_inside_q():
    ts = parse_program("var x: int[0,3]; init: x = 2; next: x' = x; p: false; q: x = 2;")
    result = game.solve_eu(game.enumerate(ts))
    assert result.solved and game.extract_strategy(result) == {}


def test_tie_break_prefers_smaller_state():
    assert game.best([(5, 0), (3, 0)], {(5, 0): 1, (3, 0): 1}) == (3, 0)
    assert game.best([(5, 0)], {(5, 0): 2}) == (5, 0)
    assert game.best([(7, 0)], {}) is None


def test_reach_game_p7():
    space = space_of("p7")
    result = game.solve_reach_game(space)
    assert result.solved
    assert result.distance[(3,)] <= 2
    assert game.replay_game_exhaustive(space, result, game.extract_strategy(result))


def test_reach_game_reset_unrealizable():
    result = game.solve_reach_game(space_of("p7_reset"))
    assert not result.solved
    # The environment's answer from the initial state is the reset to 3.
    assert result.counterstrategy[(0,)] == (3,)


def test_reach_game_init_in_goal():
    ts = parse_program("var x: int[0,3]; init: x = 3; env: x' = x; goal: x >= 3;")
    result = game.solve_reach_game(game.enumerate(ts, sys_step=1))
    assert result.solved and result.distance[(3,)] == 0
    # The strategy used from the initial states is empty.
    verdict = game.solve(generate(ts, "reach-game", SchemaConfig(sys_step=1)))
    assert isinstance(verdict, Solved) and verdict.model["sys"] == FALSE


def test_random_replay_on_large_space():
    ts = parse_program("var x: int[0,1200]; init: x = 0; env: x' = x || x' = x + 1; "
                       "goal: x >= 1200;")
    space = game.enumerate(ts, sys_step=2)
    result = game.solve_reach_game(space)
    assert result.solved
    assert game.replay_game_random(space, result, game.extract_strategy(result), plays=100)


def test_replay_detects_broken_strategy():
    space = space_of("p6")
    result = game.solve_eu(space)
    strategy = game.extract_strategy(result)
    strategy[(2,)] = (2,)
    assert not game.replay_eu(space, result, strategy)


# --- Horn level ----------------------------------------------------------------

def test_horn_eu_p6_model():
    hs = generate(corpus.load("p6").ts, "exists-until")
    verdict = game.solve(hs)
    assert isinstance(verdict, Solved)
    rank = verdict.model.ranks["round"]
    assert isinstance(rank, TableRank)
    assert rank.as_dict() == {(x,): 5 - x for x in range(6)}
    assert model_holds(hs, verdict.model)


def test_horn_eu_literal_variant_refutes_p6():
    hs = generate(corpus.load("p6").ts, "exists-until", SchemaConfig("literal"))
    verdict = game.solve(hs)
    assert isinstance(verdict, Refuted) and check_evidence(hs, verdict.evidence)


def test_horn_eu_unreachable_closed_set():
    hs = generate(corpus.load("p6_unreach").ts, "exists-until")
    verdict = game.solve(hs)
    assert isinstance(verdict, Refuted)
    assert isinstance(verdict.evidence, ClosedSetEvidence)
    assert (0,) in verdict.evidence.states


def test_horn_game_p7_sys_relation():
    entry = corpus.load("p7")
    hs = generate(entry.ts, "reach-game", entry.config())
    verdict = game.solve(hs)
    assert isinstance(verdict, Solved)
    assert model_holds(hs, verdict.model)


def test_horn_game_reset_counterstrategy():
    entry = corpus.load("p7_reset")
    hs = generate(entry.ts, "reach-game", entry.config())
    verdict = game.solve(hs)
    assert isinstance(verdict, Refuted)
    assert verdict.evidence.choice_map()[(0,)] == (3,)


def test_estimator():
    est = game.AttractorSolver(objective="eu").fit(corpus.load("p6").ts)
    assert est.score() == 1.0
    assert est.predict([(0,), (5,)]) == [(1,), None]
    assert game.AttractorSolver(objective="game", sys_step=1).fit(
        corpus.load("p7_reset").ts).score() == 0.0
