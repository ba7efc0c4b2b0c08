import csv
import io
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings

from mbsim.checkers import NO, Connectivity, Hamiltonicity, MinDegree, PerfectMatching
from mbsim.errors import ParameterError
from mbsim.graph import complete_graph, cycle_graph, path_graph, sample_gnp
from mbsim.maker import desk_parameters
from mbsim.resilience import (CAVEAT, DeletionPlan, ResilienceEstimate, adversary_destroy,
                              check_gpr_resilient, estimate_local_resilience, exact_ratio,
                              local_budgets, wilson_interval)

from oracles import MAX_ORACLE_EDGES, brute_local_resilience
from strategies import graphs


def _sound(plan, prop):
    assert plan.respects_budget()
    rest = plan.remainder()
    assert plan.certificate is not None or prop.check(rest).status == NO


def test_zero_budget_never_destroys():
    for prop in (Connectivity(), Hamiltonicity(), PerfectMatching()):
        assert adversary_destroy(complete_graph(10), prop, 0.0) is None
        assert adversary_destroy(complete_graph(30), prop, 0.0) is None


def test_full_budget_disconnects():
    for n in (2, 5, 12, 40):
        plan = adversary_destroy(complete_graph(n), Connectivity(), 1.0)
        assert plan is not None
        _sound(plan, Connectivity())


def test_bad_r_is_rejected():
    with pytest.raises(ParameterError):
        adversary_destroy(complete_graph(4), Connectivity(), 1.5)


def test_estimator_requires_property():
    with pytest.raises(ParameterError):
        estimate_local_resilience(path_graph(5), Hamiltonicity())
    with pytest.raises(ParameterError):
        estimate_local_resilience(cycle_graph(5), Connectivity(), precision=0)


@pytest.mark.parametrize("n", range(3, 9))
def test_complete_graph_closed_forms(n):
    ham = estimate_local_resilience(complete_graph(n), Hamiltonicity())
    con = estimate_local_resilience(complete_graph(n), Connectivity())
    assert ham.exact and con.exact
    assert ham.upper == pytest.approx((n // 2) / (n - 1))
    assert con.upper == pytest.approx(math.ceil(n / 2) / (n - 1))
    assert ham.lower == ham.upper and con.lower == con.upper
    _sound(ham.plan, Hamiltonicity())
    _sound(con.plan, Connectivity())


def test_k8_connectivity_found_by_heuristics():
    G = complete_graph(8)
    r = 4 / 7
    plan = adversary_destroy(G, Connectivity(), r, exhaustive=False)
    assert plan is not None and plan.heuristic != "exhaustive"
    _sound(plan, Connectivity())
    below = max(k / 7 for k in range(8) if k / 7 < r)
    assert adversary_destroy(G, Connectivity(), below) is None


@settings(max_examples=25)
@given(graphs(4, 7))
def test_exact_estimator_matches_subset_oracle(G):
    assume(G.m <= MAX_ORACLE_EDGES)
    for kind, prop in (("connectivity", Connectivity()), ("hamiltonicity", Hamiltonicity())):
        if not prop.check(G).holds:
            continue
        est = estimate_local_resilience(G, prop)
        want = brute_local_resilience(G, kind)
        assert est.exact
        assert exact_ratio(G, est.plan.H) == want
        _sound(est.plan, prop)


@settings(max_examples=25)
@given(graphs(6, 14, p=0.6))
def test_returned_plans_are_sound(G):
    for prop in (Connectivity(), MinDegree(2), PerfectMatching(), Hamiltonicity()):
        if not prop.check(G).holds:
            continue
        for r in (0.3, 0.6, 0.9):
            plan = adversary_destroy(G, prop, r, exhaustive=False, seed=1)
            if plan is not None:
                assert plan.r == r
                _sound(plan, prop)


def test_heuristic_upper_bound_never_below_exact():
    for seed in range(12):
        G = sample_gnp(8, 0.7, seed)
        for prop in (Connectivity(), Hamiltonicity()):
            if not prop.check(G).holds:
                continue
            ex = estimate_local_resilience(G, prop)
            he = estimate_local_resilience(G, prop, exhaustive=False, seed=seed)
            assert he.upper >= ex.upper - 1e-12
            assert he.lower <= ex.upper + 1e-12


def test_global_mode():
    G = complete_graph(6)
    plan = adversary_destroy(G, Connectivity(), 5 / 15, mode="global")
    assert plan is not None and len(plan.H) == 5 and plan.respects_budget()
    assert adversary_destroy(G, Connectivity(), 4 / 15, mode="global") is None


def test_plan_and_estimate_invariants():
    G = complete_graph(5)
    plan = DeletionPlan(G, [(0, 1), (0, 2)], 0.5)
    assert plan.respects_budget() and plan.ratio == 0.5
    assert not DeletionPlan(G, [(0, 1), (0, 2), (0, 3)], 0.5).respects_budget()
    assert local_budgets(G, 0.5).tolist() == [2] * 5
    with pytest.raises(AssertionError):
        ResilienceEstimate(upper=0.2, lower=0.5, exact=False)


def test_dense_random_hamiltonicity_estimate():
    ups = []
    for seed in range(20):
        G = sample_gnp(100, 0.2, seed)
        if not Hamiltonicity().check(G).holds:
            continue
        est = estimate_local_resilience(G, Hamiltonicity(), seed=seed)
        assert not est.exact and est.lower <= est.upper
        _sound(est.plan, Hamiltonicity())
        ups.append(est.upper)
    assert len(ups) >= 15
    assert 0.35 <= float(np.mean(ups)) <= 0.65


def test_gpr_trivial_cases():
    G = complete_graph(30)
    res = check_gpr_resilient(G, 0.5, 0.0, Connectivity(), 5, seed=2)
    assert res.fraction == 1.0 and res.caveat == CAVEAT
    res = check_gpr_resilient(G, 0.5, 1.0, MinDegree(1), 5, seed=2)
    assert res.fraction == 0.0
    rows = list(csv.DictReader(io.StringIO(res.to_csv())))
    assert len(rows) == 5 and set(rows[0]) == {"trial", "seed", "r", "destroyed", "heuristic"}
    with pytest.raises(ParameterError):
        check_gpr_resilient(G, 0.5, 0.1, Connectivity(), 0)


def test_gpr_is_seed_deterministic():
    G = complete_graph(24)
    a = check_gpr_resilient(G, 0.5, 0.3, Hamiltonicity(), 4, seed=9)
    b = check_gpr_resilient(G, 0.5, 0.3, Hamiltonicity(), 4, seed=9)
    assert a.outcomes == b.outcomes


def test_wilson_interval():
    lo, hi = wilson_interval(45, 50)
    assert lo < 0.9 < hi
    assert wilson_interval(0, 0) == (0.0, 1.0)
    assert wilson_interval(10, 10)[1] == pytest.approx(1.0)


@pytest.mark.slow
def test_complete_host_sixth_resilience():
    p, _, _ = desk_parameters(128)
    res = check_gpr_resilient(complete_graph(128), p, 1 / 6, Hamiltonicity(), 50, seed=0)
    assert res.fraction >= 0.9
