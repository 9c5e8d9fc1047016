import json
import math
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from helpers import load, random_game_dict
from wtg.core_model import (INF, NEG_INF, MAX, MIN, EdgeNotEnabled, GameParseError, Play,
                            edge_successor, ext_add, fmt_decimal, fmt_rational, game_from_dict,
                            game_to_dict, game_to_json, parse_game, play_weight, to_rational)


@pytest.fixture(scope="module")
def fig5():
    return load("fig5.json")


def trans(g, src, dst):
    return next(t for t in g.transitions if t.source == src and t.target == dst)


def test_fig5_stats(fig5):
    assert len(fig5.locations) == 6
    assert len(fig5.transitions) == 7
    assert fig5.clock_bound == 2
    assert fig5.w_max_L == 1
    assert fig5.w_max_T == 2
    assert fig5.w_max_e == 2 * 1 + 2
    assert fig5.locations["l0"].owner == MAX and fig5.locations["l1"].owner == MIN


def test_final_weight_defaults_to_zero():
    doc = {"clocks": ["x"], "clock_bound": 1, "locations": [{"id": "t", "target": True}]}
    g = game_from_dict(doc)
    assert g.final_weight("t").eval((F(1, 2),)) == 0


def minimal(**over):
    doc = {"clocks": ["x"], "clock_bound": 1, "initial": "a",
           "locations": [{"id": "a", "owner": "min", "rate": 1}, {"id": "t", "target": True}],
           "transitions": [{"from": "a", "to": "t", "guard": [{"clock": "x", "op": "<", "const": 1}],
                            "resets": [], "weight": 0}]}
    doc.update(over)
    return doc


@pytest.mark.parametrize("doc,code", [
    (minimal(locations=[]), "no-locations"),
    ({k: v for k, v in minimal().items() if k != "clock_bound"}, "clock-bound-required"),
    (minimal(clock_bound=0), "clock-bound-required"),
    (minimal(transitions=[{"from": "a", "to": "t", "guard": [{"clock": "z", "op": "<", "const": 1}]}]),
     "unknown-clock"),
    (minimal(transitions=[{"from": "t", "to": "a"}]), "target-has-outgoing"),
    (minimal(transitions=[{"from": "a", "to": "t", "guard": [{"clock": "x", "op": "<", "const": "1/2"}]}]),
     "non-integer-constant"),
    (minimal(transitions=[{"from": "a", "to": "b"}]), "unknown-location"),
    (minimal(locations=[{"id": "t", "owner": "max", "target": True}], initial="t", transitions=[]),
     "target-owner"),
])
def test_parse_errors(doc, code):
    with pytest.raises(GameParseError) as e:
        game_from_dict(doc)
    assert e.value.code == code


def test_syntax_error_reports_position():
    with pytest.raises(GameParseError) as e:
        parse_game('{"clocks": ["x"],\n  "clock_bound": }')
    assert e.value.code == "syntax"
    assert "line 2" in str(e.value)


def test_guards_are_bounded_by_M(fig5):
    for t in fig5.transitions:
        for x in range(fig5.n_clocks):
            assert not t.guard.holds(tuple(F(3) if i == x else F(1, 2) for i in range(2)))


def test_closed_guard():
    g = game_from_dict(minimal())
    t = g.transitions[0]
    assert not t.guard.holds((F(1),))
    assert t.guard.closed().holds((F(1),))


def test_edge_successor_examples(fig5):
    t13 = trans(fig5, "l1", "l3")
    cfg, w = edge_successor(fig5, ("l1", (F(0), F(0))), 1, t13)
    assert cfg == ("l3", (F(1), F(0))) and w == 2
    with pytest.raises(EdgeNotEnabled):
        edge_successor(fig5, ("l1", (F(0), F(0))), 0, t13)
    t3t = trans(fig5, "l3", "lt")
    cfg, w = edge_successor(fig5, ("l3", (F(1, 3), F(0))), 0, t3t)
    assert cfg == ("lt", (F(1, 3), F(0))) and w == 0


def test_play_weight_along_zero_cycle(fig5):
    idx = {(t.source, t.target): t.index for t in fig5.transitions}
    moves = [(F(1, 2), idx["l1", "l3"]), (F(1, 2), idx["l3", "l4"]), (F(1, 4), idx["l4", "l1"])]
    cycle = Play(("l1", (F(0), F(1, 2))), moves)
    # one traversal of the zero cycle: 3/2 + 1/2 - 2
    cfgs = cycle.configurations(fig5)
    assert cfgs[-1] == ("l1", (F(0), F(3, 4)))
    assert play_weight(fig5, cycle) == 0
    full = Play(cycle.start, moves + [(F(1, 4), idx["l1", "l3"]), (0, idx["l3", "lt"])])
    # 5/4 for the last l1 -> l3 move plus the final weight x = 1/4
    assert play_weight(fig5, full) == F(3, 2)


def test_play_weight_trivial_cases(fig5):
    assert play_weight(fig5, Play(("lt", (F(0), F(0))))) == 0
    assert play_weight(fig5, Play(("l1", (F(0), F(0))), infinite=True)) == INF


def test_extended_arithmetic():
    assert ext_add(INF, 3) == INF
    assert ext_add(F(1, 2), NEG_INF) == NEG_INF
    assert ext_add(F(1, 2), F(1, 3)) == F(5, 6)
    with pytest.raises(AssertionError):
        ext_add(INF, NEG_INF)
    assert NEG_INF < F(-10 ** 30) < F(10 ** 30) < INF


def test_rational_formatting():
    assert fmt_rational(F(6, 4)) == "3/2"
    assert fmt_rational(F(4)) == "4"
    assert fmt_rational(NEG_INF) == "-inf"
    assert to_rational("3/6") == F(1, 2)
    assert to_rational("+inf") == INF
    assert fmt_decimal(F(-5, 3), 3) == "-1.667"
    assert fmt_decimal(F(1, 8), 2) == "0.13"


@pytest.mark.parametrize("name", ["fig1.json", "fig5.json", "mixed.json"])
def test_round_trip_examples(name):
    g = load(name)
    again = parse_game(game_to_json(g))
    assert again == g


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from([1, 2]))
def test_round_trip_random(seed, n_clocks):
    g = game_from_dict(random_game_dict(random.Random(seed), n_clocks=n_clocks, M=2))
    assert game_from_dict(json.loads(json.dumps(game_to_dict(g)))) == g


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_play_weight_is_additive(seed):
    """Random plays on the fig5 game: the weight of a play is the sum of its two halves."""
    rng = random.Random(seed)
    g = load("fig5.json")
    cfg = ("l1", (F(0), F(rng.randint(1, 9), 10)))
    moves, c = [], cfg
    for _ in range(6):
        loc, nu = c
        options = []
        for t in g.out[loc]:
            for k in range(0, 41):
                d = F(k, 20)
                moved = tuple(v + d for v in nu)
                if t.guard.holds(moved):
                    options.append((d, t))
        if not options:
            break
        d, t = rng.choice(options)
        c, _ = edge_successor(g, c, d, t)
        assert all(0 <= v <= g.clock_bound for v in c[1])
        moves.append((d, t.index))
    cut = rng.randint(0, len(moves))
    first = Play(cfg, moves[:cut])
    mid = first.configurations(g)[-1]
    whole = Play(cfg, moves)
    if not g.locations[whole.configurations(g)[-1][0]].target:
        assert play_weight(g, whole) == play_weight(g, first) + play_weight(g, Play(mid, moves[cut:]))
    assert not math.isnan(float(play_weight(g, whole)))
