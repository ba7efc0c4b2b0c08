import copy
import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mbsim.breakers import RandomBreaker, make_breaker
from mbsim.checkers import Connectivity, check_connectivity, property_from_id
from mbsim.engine import (BREAKER, MAKER, BreakerStrategy, GameResult, GreedyConnectivityMaker,
                          MakerStrategy, OwnershipBoard, PassiveMaker, RandomMaker,
                          check_win_claims, play_game)
from mbsim.errors import ParameterError, ProtocolViolation
from mbsim.graph import Graph, complete_graph, empty_graph, sample_gnp
from mbsim.maker import SMStrategy, desk_parameters

from strategies import graphs


def test_single_edge_goes_to_breaker():
    res = play_game(complete_graph(2), 1, RandomMaker(), RandomBreaker(), "connectivity", seed=0)
    assert res.winner == "breaker"
    assert res.breaker_graph.m == 1 and res.maker_graph.m == 0


def _all_breaker_plays(board, maker, out):
    if board.n_free == 0:
        out.append(check_connectivity(board.maker_graph()).holds)
        return
    for e in board.sorted_free_ids().tolist():
        b2, m2 = copy.deepcopy(board), copy.deepcopy(maker)
        b2.claim(e, BREAKER)
        if b2.n_free:
            mv = m2.move(b2)
            if mv is not None:
                b2.claim(mv, MAKER)
        _all_breaker_plays(b2, m2, out)


def test_k4_greedy_connectivity_wins_against_every_breaker():
    board = OwnershipBoard(complete_graph(4), 1)
    maker = GreedyConnectivityMaker()
    maker.start(board, np.random.default_rng(0))
    outcomes = []
    _all_breaker_plays(board, maker, outcomes)
    assert len(outcomes) == 48 and all(outcomes)


@pytest.mark.parametrize("maker_cls", [RandomMaker, GreedyConnectivityMaker])
def test_per_turn_and_final_checks_agree(maker_cls):
    G = sample_gnp(14, 0.6, 3)
    for s in range(10):
        for b in (1, 2):
            a = play_game(G, b, maker_cls(), RandomBreaker(), "connectivity", seed=s)
            c = play_game(G, b, maker_cls(), RandomBreaker(), "connectivity", seed=s,
                          check_every_turn=True)
            assert a.winner == c.winner
            if c.winner == "maker":
                assert c.decided_turn <= a.turns


def test_check_win_claims_examples():
    G = complete_graph(5)
    res = play_game(G, 1, GreedyConnectivityMaker(), RandomBreaker(), "connectivity", seed=2)
    assert check_win_claims(res, "connectivity")
    edgeless = GameResult("breaker", empty_graph(5), G, 0, None, "connectivity")
    assert not Connectivity().check(edgeless.maker_graph).holds
    assert check_win_claims(edgeless, "connectivity")
    full = GameResult("maker", G, empty_graph(5), 0, None, "connectivity")
    assert check_win_claims(full, Connectivity())
    liar = GameResult("maker", empty_graph(5), G, 0, None, "connectivity")
    assert not check_win_claims(liar, "connectivity")


class _Bad(BreakerStrategy):
    def __init__(self, how):
        self.how = how

    def move(self, board):
        ids = board.sorted_free_ids().tolist()
        if self.how == "few":
            return ids[:board.b - 1]
        if self.how == "dup":
            return [ids[0]] * board.b
        return board.maker_ids[:1] + ids[:board.b - 1] if board.maker_ids else ids[:board.b]


class _Thief(MakerStrategy):
    def move(self, board):
        return board.breaker_ids[0]


@pytest.mark.parametrize("how", ["few", "dup", "taken"])
def test_breaker_protocol_violations(how):
    with pytest.raises(ProtocolViolation) as ei:
        play_game(complete_graph(8), 2, RandomMaker(), _Bad(how), seed=0)
    assert ei.value.offender == "breaker"


def test_maker_protocol_violation_names_maker():
    with pytest.raises(ProtocolViolation) as ei:
        play_game(complete_graph(5), 1, _Thief(), RandomBreaker(), seed=0)
    assert ei.value.offender == "maker"


def test_bias_must_be_positive():
    with pytest.raises(ParameterError):
        play_game(complete_graph(4), 0, PassiveMaker(), RandomBreaker())


class _Auditor(BreakerStrategy):
    """Wraps a Breaker and audits the board before every Breaker move."""

    def __init__(self, inner):
        self.inner = inner
        self.turns = 0

    def start(self, board, rng):
        super().start(board, rng)
        self.inner.start(board, rng)

    def move(self, board):
        m = board.G.m
        nm, nb = len(board.maker_ids), len(board.breaker_ids)
        assert board.n_free + nm + nb == m
        assert np.count_nonzero(board.owner == 0) == board.n_free
        assert nb <= board.b * self.turns
        assert nm <= self.turns
        assert not set(board.maker_ids) & set(board.breaker_ids)
        self.turns += 1
        return self.inner.move(board)


@given(graphs(min_n=2, max_n=10), st.integers(1, 4), st.integers(0, 1000),
       st.sampled_from(["random", "passive", "greedy"]))
def test_conservation_and_disjointness(G, b, seed, kind):
    maker = {"random": RandomMaker, "passive": PassiveMaker,
             "greedy": GreedyConnectivityMaker}[kind]()
    res = play_game(G, b, maker, _Auditor(make_breaker("random")), "connectivity", seed=seed,
                    fast_forward=False)
    M, B = set(res.maker_graph.edges()), set(res.breaker_graph.edges())
    assert not M & B and M | B == set(G.edges())
    assert res.maker_graph.is_subgraph_of(G) and res.breaker_graph.is_subgraph_of(G)


def test_passive_maker_never_errors():
    for s in range(5):
        res = play_game(sample_gnp(20, 0.5, s), 3, PassiveMaker(), make_breaker("isolator"),
                        "min-degree:1", seed=s)
        assert res.maker_graph.m == 0 and res.winner == "breaker"


def test_fast_forward_matches_full_play():
    n = 48
    p, eps, b = desk_parameters(n)
    G = complete_graph(n)
    for s in range(3):
        a = play_game(G, b, SMStrategy(p, eps), RandomBreaker(), "hamiltonicity", seed=s)
        c = play_game(G, b, SMStrategy(p, eps), RandomBreaker(), "hamiltonicity", seed=s,
                      fast_forward=False)
        assert a.maker_graph == c.maker_graph
        assert a.turns == c.turns
        assert a.winner == c.winner


def test_trace_lines():
    res = play_game(complete_graph(6), 2, RandomMaker(), RandomBreaker(), seed=4, trace=True)
    lines = [json.loads(x) for x in res.trace_jsonl().splitlines()]
    assert lines[0]["player"] == "breaker" and lines[0]["turn"] == 1
    assert {tuple(e) for r in lines for e in r["edges"]} == set(complete_graph(6).edges())
    assert all(len(r["edges"]) <= (2 if r["player"] == "breaker" else 1) for r in lines)


def test_same_seed_same_game():
    G = sample_gnp(30, 0.4, 1)
    a = play_game(G, 2, RandomMaker(), make_breaker("max-maker-degree"), seed=7, trace=True)
    c = play_game(G, 2, RandomMaker(), make_breaker("max-maker-degree"), seed=7, trace=True)
    assert a.trace_jsonl() == c.trace_jsonl()


def test_bias_monotonicity_empirical():
    G = complete_graph(16)
    rates = []
    for b in (3, 5, 6, 7, 8, 9):
        wins = sum(play_game(G, b, GreedyConnectivityMaker(), RandomBreaker(), "connectivity",
                             seed=s).winner == "maker" for s in range(60))
        rates.append(wins / 60)
    assert all(x >= y - 0.05 for x, y in zip(rates, rates[1:]))
    assert rates[0] == 1.0 and rates[-1] < 1.0
