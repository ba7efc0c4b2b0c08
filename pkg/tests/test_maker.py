import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import binom, chisquare

from mbsim.breakers import make_breaker
from mbsim.engine import BREAKER, OwnershipBoard, play_game
from mbsim.errors import ConfigurationError
from mbsim.graph import Graph, complete_graph, sample_gnp
from mbsim.maker import (STAGE_DONE, SMStrategy, check_hypotheses, desk_parameters, report_csv,
                         sm_final_report, sm_init, sm_maker_turn, sm_on_breaker_move, sm_stage2)


def _desk_state(n=40, seed=0, C=3.0):
    p, eps, b = desk_parameters(n, C)
    return sm_init(complete_graph(n), p, eps, seed, mode="desk")


def test_strict_hypothesis_failure_is_named():
    with pytest.raises(ConfigurationError) as ei:
        sm_init(complete_graph(1000), 0.2, 0.01)
    msg = str(ei.value)
    assert "10 ln n/(eps p)" in msg and "999" in msg
    assert f"{10 * math.log(1000) / (0.01 * 0.2):.6g}" in msg


def test_strict_mode_rejects_desk_parameters():
    p, eps, b = desk_parameters(256)
    assert check_hypotheses(complete_graph(256), p, eps, "strict")
    assert check_hypotheses(complete_graph(256), p, eps, "desk") == []


def test_fresh_state():
    s = _desk_state()
    G = s.G
    assert s.U.sum() == 2 * G.m
    assert np.array_equal(s.U, s.U.T)
    assert all(s.sim.is_active(v) for v in range(G.n))
    assert s.sim.sizes.tolist() == (4 * G.degrees).tolist()
    assert s.sim.alpha == pytest.approx(s.p / 2) and s.sim.b == 2 * s.b


def test_breaker_move_charges_boxes():
    s = _desk_state()
    before = s.sim.w_B.copy()
    sm_on_breaker_move(s, [])
    assert np.array_equal(before, s.sim.w_B)
    sm_on_breaker_move(s, [(3, 9)])
    assert np.flatnonzero(s.sim.w_B - before).tolist() == [3, 9]
    s2 = _desk_state()
    sm_on_breaker_move(s2, [(5, u) for u in (0, 1, 2)])
    assert s2.sim.w_B[5] == 3


def test_empty_exposure_list_is_a_vacuous_type_one_failure():
    s = _desk_state()
    v = 0
    s.U[v, :] = False
    s.U[:, v] = False
    probe = np.random.Generator(type(s.rng.bit_generator)())
    probe.bit_generator.state = s.rng.bit_generator.state
    assert sm_maker_turn(s, None) is None
    assert s.fI[v] == 1 and s.events["a"] == 1
    assert s.rng.random() == probe.random()
    assert not s.sim.is_active(v)


def test_certain_success_exposes_one_pair():
    G = complete_graph(12)
    s = sm_init(G, 0.999999, 25.0, seed=0, mode="unchecked")
    board = OwnershipBoard(G, 1)
    for _ in range(5):
        before = s.U.sum()
        eid = sm_maker_turn(s, board)
        assert before - s.U.sum() == 2
        if eid is not None:
            board.claim(eid, 1)


def test_stage_two_on_empty_sets_changes_nothing():
    s = _desk_state()
    s.U[:] = False
    sm_stage2(s)
    assert s.stage == STAGE_DONE and s.residue_pairs == 0
    assert s.fII_stage2.sum() == 0
    assert sm_maker_turn(s, None) is None


def test_stage_two_clears_everything():
    s = _desk_state(seed=3)
    sm_stage2(s)
    assert s.U.sum() == 0 and s.stage == STAGE_DONE
    assert s.exposed.all()


def test_vertex_avoided_by_breaker_has_no_type_two_failures():
    n = 40
    s = _desk_state(n, seed=5)
    G = s.G
    board = OwnershipBoard(G, s.b)
    rng = np.random.default_rng(0)
    for _ in range(400):
        pool = [e for e in board.sorted_free_ids().tolist() if 0 not in board.edge(e)]
        if len(pool) < s.b:
            break
        mv = [int(x) for x in rng.choice(pool, size=s.b, replace=False)]
        for e in mv:
            board.claim(e, BREAKER)
        sm_on_breaker_move(s, mv)
        eid = sm_maker_turn(s, board)
        if eid is not None:
            board.claim(eid, 1)
        if s.stage == STAGE_DONE:
            break
    assert s.fII[0] == 0
    rows = sm_final_report(s, include_stage2=False)
    assert rows[0]["fII"] == 0


def _play(n, breaker, seed, C=3.0):
    p, eps, b = desk_parameters(n, C)
    strat = SMStrategy(p, eps)
    res = play_game(complete_graph(n), b, strat, make_breaker(breaker), "hamiltonicity", seed=seed)
    return strat.state, res


@settings(max_examples=12)
@given(st.integers(24, 90), st.sampled_from(["random", "isolator", "max-maker-degree"]),
       st.integers(0, 10**6))
def test_game_invariants(n, breaker, seed):
    s, res = _play(n, breaker, seed)
    assert s.stage == STAGE_DONE and s.gate_violations == 0
    assert s.fI.max() <= 1
    assert (s.sim.w_M + s.sim.w_B <= 4 * s.degrees).all()
    assert res.maker_graph.is_subgraph_of(s.gprime_graph())
    assert np.array_equal(res.maker_graph.degrees, s.maker_deg)
    assert s.U.sum() == 0
    for r in sm_final_report(s):
        assert r["d_Maker"] + r["fII"] <= r["d_Gprime"]
        assert r["fI"] <= 1


def test_report_csv_columns():
    s, _ = _play(40, "random", 1)
    rows = list(csv.DictReader(io.StringIO(report_csv(sm_final_report(s)))))
    assert len(rows) == 40
    assert list(rows[0]) == ["vertex", "d_G", "d_Gprime", "d_Maker", "fI", "fII", "fII_flag",
                             "gprime_flag"]


def test_game_bias_above_strategy_bias_is_rejected():
    p, eps, b = desk_parameters(40)
    with pytest.raises(ConfigurationError):
        play_game(complete_graph(40), b + 1, SMStrategy(p, eps), make_breaker("random"))


def _binned_chisquare(obs_values, probs_fn, support):
    """Chi-square of observed integer values against a pmf, merging sparse tails."""
    counts = np.bincount(obs_values, minlength=support + 1)[:support + 1]
    exp = probs_fn(np.arange(support + 1)) * len(obs_values)
    bins_o, bins_e, acc_o, acc_e = [], [], 0.0, 0.0
    for o, e in zip(counts, exp):
        acc_o += o
        acc_e += e
        if acc_e >= 5:
            bins_o.append(acc_o)
            bins_e.append(acc_e)
            acc_o = acc_e = 0.0
    bins_o[-1] += acc_o
    bins_e[-1] += acc_e
    bins_e = np.array(bins_e) * sum(bins_o) / sum(bins_e)
    return chisquare(bins_o, bins_e).pvalue


def test_gprime_degrees_are_binomial():
    n = 512
    p, eps, b = desk_parameters(n)
    degs = []
    for s in range(6):
        st_, _ = _play(n, "random", 100 + s)
        degs.extend(st_.gprime_degrees().tolist())
    pval = _binned_chisquare(np.array(degs), lambda k: binom.pmf(k, n - 1, p), n - 1)
    assert pval > 0.01
