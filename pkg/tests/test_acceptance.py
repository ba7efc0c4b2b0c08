"""End-to-end acceptance checks; one pass/fail line per criterion is printed
in the terminal summary."""

import itertools
import math

import networkx as nx
import numpy as np
import pytest
from scipy.stats import binom, chisquare

import oracles
from mbsim.breakers import BREAKERS, make_breaker
from mbsim.checkers import (Connectivity, Hamiltonicity, MinDegree, check_hamiltonicity,
                            check_pancyclicity, is_cycle, is_hamilton_cycle)
from mbsim.digraphs import (Digraph, delta_zero, from_bipartite, play_directed_game,
                            to_bipartite)
from mbsim.engine import RandomMaker, play_game
from mbsim.graph import Graph, complete_graph, make_rng, min_degree, sample_gnp
from mbsim.harness import ExperimentConfig, run_experiment
from mbsim.maker import SMStrategy, desk_parameters, sm_final_report
from mbsim.minbox import (ADVERSARIES, BOUND_SLACK, MinBoxParams, danger_bound, play_minbox,
                          winning_min_size)
from mbsim.posa import check_expansion, find_e_boosters, longest_path_through, rotate_all
from mbsim.resilience import estimate_local_resilience
from mbsim.trees import embed_tree, random_tree_with_bare_path

RESULTS: dict[int, tuple[str, bool, str]] = {}


def record(num, name, ok, detail):
    RESULTS[num] = (name, bool(ok), detail)
    assert ok, f"criterion {num} ({name}): {detail}"


def _binned_pvalue(values, pmf, support):
    counts = np.bincount(values, minlength=support + 1)[:support + 1]
    exp = pmf(np.arange(support + 1)) * len(values)
    obs_b, exp_b, acc_o, acc_e = [], [], 0.0, 0.0
    for o, e in zip(counts, exp):
        acc_o += o
        acc_e += e
        if acc_e >= 5:
            obs_b.append(acc_o)
            exp_b.append(acc_e)
            acc_o = acc_e = 0.0
    obs_b[-1] += acc_o
    exp_b[-1] += acc_e
    exp_b = np.array(exp_b) * sum(obs_b) / sum(exp_b)
    return float(chisquare(obs_b, exp_b).pvalue)


# -- MinBox --------------------------------------------------------------------

MINBOX_NS = (10, 100, 500)
MINBOX_BS = (1, 2, 5)


@pytest.fixture(scope="module")
def minbox_games():
    """1000 games per (n, b, adversary) at the winning box size."""
    out = {}
    for n, b in itertools.product(MINBOX_NS, MINBOX_BS):
        alpha = 0.5 / (1 + b)
        D = math.ceil(winning_min_size(n, b, alpha))
        params = MinBoxParams.uniform(n, D, alpha, b)
        for adv in sorted(ADVERSARIES):
            out[n, b, adv] = [play_minbox(params, adv, seed=s, record=False) for s in range(1000)]
    return out


def test_c01_minbox_danger_bound(minbox_games):
    violations = sum(t.violations for ts in minbox_games.values() for t in ts)
    over = sum(t.max_danger > danger_bound(n, b) + BOUND_SLACK
               for (n, b, _), ts in minbox_games.items() for t in ts)
    # heterogeneous sizes and extra Maker claims, where the bound must still hold
    extra = 0
    for n, b in itertools.product(MINBOX_NS, MINBOX_BS):
        rng = make_rng(1000 + n, b)
        for adv in sorted(ADVERSARIES):
            for s in range(50):
                sizes = rng.integers(1, 40, size=n)
                t = play_minbox(MinBoxParams(sizes, 0.3, b), adv, allow_extra_claims=True,
                                seed=s, record=False)
                extra += t.violations
    games = sum(len(ts) for ts in minbox_games.values())
    record(1, "MinBox danger bound", violations == over == extra == 0,
           f"{games} games at winning size, {violations + over} violations; "
           f"{extra} in heterogeneous games")


def test_c02_minbox_win_condition(minbox_games):
    lost = {k: sum(not t.maker_won for t in ts) for k, ts in minbox_games.items()}
    bad = {k: v for k, v in lost.items() if v}
    record(2, "MinBox win condition", not bad,
           f"{len(lost)} configurations x 1000 trials, configurations with losses: {bad}")


# -- S_M -----------------------------------------------------------------------

class AuditedSM(SMStrategy):
    """S_M with an independent per-turn audit against the board."""

    def start(self, board, rng):
        super().start(board, rng)
        self.violations = []
        self._failures = 0

    def observe_breaker(self, board, claimed):
        super().observe_breaker(board, claimed)
        st = self.state
        # only the endpoints of the new Breaker edges changed
        touched = np.unique(board.G.edge_array[np.asarray(claimed, dtype=np.int64)])
        active = st.sim.w_M[touched] < st.sim.need[touched]
        gate = board.breaker_deg[touched] < st.eps * st.degrees[touched] / 4.0
        if np.any(active & ~gate):
            self.violations.append("gate")
        if np.any(st.sim.w_M[touched] + st.sim.w_B[touched] > st.sim.sizes[touched]):
            self.violations.append("box")

    def move(self, board):
        mv = super().move(board)
        st = self.state
        if st.events["a"] != self._failures:
            self._failures = st.events["a"]
            if st.fI.max() > 1:
                self.violations.append("fI")
        return mv


def _audited_game(n, breaker, seed):
    p, eps, b = desk_parameters(n)
    strat = AuditedSM(p, eps)
    try:
        res = play_game(complete_graph(n), b, strat, make_breaker(breaker), None, seed=seed)
    except Exception as exc:  # any invariant failure raised inside S_M
        return [type(exc).__name__], None
    return strat.violations, (strat.state, res)


@pytest.fixture(scope="module")
def sm_random_games():
    """100 audited games vs random Breaker at each n of the statistical claims."""
    return {n: [_audited_game(n, "random", s) for s in range(100)] for n in (256, 512, 1024)}


def test_c03_sm_invariants(sm_random_games):
    bad = 0
    games = 0
    for n in (256, 512):
        for v, _ in sm_random_games[n]:
            games += 1
            bad += bool(v)
    plan = {128: 20, 256: 8, 512: 4}
    for n, count in plan.items():
        for breaker in sorted(BREAKERS):
            if breaker == "random" and n != 128:
                continue
            for s in range(count):
                v, _ = _audited_game(n, breaker, 10_000 + s)
                games += 1
                bad += bool(v)
    record(3, "S_M deterministic invariants", bad == 0, f"{games} games, {bad} with violations")


def test_c04_sm_statistical_claims(sm_random_games):
    flagged, residue = [], []
    for n in (256, 512, 1024):
        states = [g[1][0] for g in sm_random_games[n] if g[1] is not None]
        flagged.append(float(np.mean([any(r["fII_flag"] for r in sm_final_report(s)) for s in states])))
        residue.append(float(np.mean([s.residue_pairs > 0 for s in states])))
    ok = all(a >= b for a, b in zip(flagged, flagged[1:])) and \
        all(a >= b for a, b in zip(residue, residue[1:]))
    record(4, "S_M statistical claims", ok,
           f"fII-flag fractions {flagged}, residue fractions {residue} at n=256,512,1024")


def test_c05_exposure_law():
    n = 40
    p, eps, b = desk_parameters(n)
    G = complete_graph(n)
    counts = np.zeros(G.m, dtype=np.int64)
    degs = []
    for s in range(200):
        strat = SMStrategy(p, eps)
        play_game(G, b, strat, make_breaker("random"), None, seed=s)
        assert strat.state.exposed.all()
        counts += strat.state.gprime
        degs.extend(strat.state.gprime_degrees().tolist())
    p_edge = _binned_pvalue(counts, lambda k: binom.pmf(k, 200, p), 200)
    p_vert = _binned_pvalue(np.array(degs), lambda k: binom.pmf(k, n - 1, p), n - 1)
    record(5, "Exposure-law fidelity", p_edge > 0.01 and p_vert > 0.01,
           f"per-edge chi-square p={p_edge:.3f}, per-vertex degree chi-square p={p_vert:.3f}")


# -- boosters and rotations --------------------------------------------------------

@pytest.fixture(scope="module")
def booster_corpus():
    """Connected graphs: every atlas graph on 3..7 vertices, plus sampled 8-vertex graphs."""
    cases = []
    for H in nx.graph_atlas_g():
        if H.number_of_nodes() >= 3 and nx.is_connected(H):
            D = Graph(H.number_of_nodes(), [tuple(sorted(e)) for e in H.edges()])
            cases += [(D, e) for e in itertools.combinations(range(D.n), 2)]
    rng = make_rng(8008)
    while len(cases) < 30_000:
        D = sample_gnp(8, float(rng.uniform(0.3, 0.8)), int(rng.integers(2**31)))
        if len(D.components()) == 1:
            cases += [(D, e) for e in itertools.combinations(range(8), 2) if rng.random() < 0.25]
    return cases


def test_c06_booster_lemma(booster_corpus):
    mismatches = lemma_fail = checked = 0
    for D, e in booster_corpus:
        want = oracles.boosters(D, e)
        got = find_e_boosters(D, e)
        if want is None:
            mismatches += got.status != "already-hamiltonian"
            continue
        mismatches += got.boosters != want
        for k in (0, 1):
            if check_expansion(D, k).verified:
                checked += 1
                lemma_fail += len(want) < (k + 1) ** 2 / 2
    record(6, "e-booster lemma", mismatches == lemma_fail == 0,
           f"{len(booster_corpus)} (D, e) cases, {checked} lemma instances, "
           f"{mismatches} oracle mismatches, {lemma_fail} below (k+1)^2/2")


def test_c07_rotation_endpoint_claim(booster_corpus):
    closures = bad = 0
    for D, e in booster_corpus:
        P = longest_path_through(D, e)
        for Q in (P, P[::-1]):
            fr = rotate_all(D, Q, e)
            closures += 1
            bad += not fr.endpoint_claim_holds()
    record(7, "Rotation endpoint claim", bad == 0, f"{closures} closures, {bad} violations")


# -- application surrogates --------------------------------------------------------

def test_c08_hamiltonicity_game():
    n = 128
    p, eps, b = desk_parameters(n)
    rates = {}
    for breaker in ("random", "isolator"):
        ok = 0
        for s in range(50):
            res = play_game(complete_graph(n), b, SMStrategy(p, eps), make_breaker(breaker),
                            None, seed=s)
            H = res.maker_graph
            r = check_hamiltonicity(H, "heuristic", seed=s)
            ok += r.holds and is_hamilton_cycle(H, r.witness)
        rates[breaker] = ok / 50
    record(8, "Hamiltonicity game surrogate", min(rates.values()) >= 0.9, f"rates {rates}")


def test_c09_pancyclicity_game():
    n = 20
    p, eps, b = desk_parameters(n)
    ok = 0
    for s in range(50):
        res = play_game(complete_graph(n), b, SMStrategy(p, eps), make_breaker("random"), None,
                        seed=s)
        H = res.maker_graph
        r = check_pancyclicity(H, "exact")
        ok += r.holds and all(is_cycle(H, c, l) for l, c in r.witness.items())
    record(9, "Pancyclicity surrogate", ok / 50 >= 0.9, f"{ok}/50 pancyclic (b={b}, p={p:.3f})")


def test_c10_tree_game():
    n, Delta, alpha, C, frac = 60, 3, 0.3, 8.0, 0.1
    p, eps, b = desk_parameters(n, C)
    ok = attempts = 0
    for s in range(20):
        res = play_game(complete_graph(n), b, SMStrategy(p, eps), make_breaker("random"), None,
                        seed=s)
        H = res.maker_graph
        for j in range(10):
            spec = random_tree_with_bare_path(n, Delta, alpha, make_rng(s, 100 + j))
            er = embed_tree(H, spec, frac, seed=make_rng(s, 200 + j))
            attempts += 1
            if er.success:
                m = er.embedding.mapping
                img = nx.Graph([(m[u], m[v]) for u, v in spec.T.edges()])
                ok += (img.number_of_nodes() == n and all(H.has_edge(*e) for e in img.edges())
                       and nx.is_isomorphic(img, nx.Graph(spec.T.edges())))
    record(10, "Tree game surrogate", ok / attempts >= 0.85, f"{ok}/{attempts} trees embedded")


# -- resilience, digraphs, reproducibility ---------------------------------------

def test_c11_resilience_exactness():
    mismatches = cases = 0
    for n in range(3, 9):
        K = complete_graph(n)
        forms = {"connectivity": math.ceil(n / 2) / (n - 1), "hamiltonicity": (n // 2) / (n - 1)}
        for kind, prop in (("connectivity", Connectivity()), ("hamiltonicity", Hamiltonicity())):
            est = estimate_local_resilience(K, prop)
            want = forms[kind]
            if K.m <= oracles.MAX_ORACLE_EDGES:
                assert float(oracles.brute_local_resilience(K, kind)) == pytest.approx(want)
            cases += 1
            mismatches += abs(est.upper - want) > 1e-12 or not est.exact
    rng = make_rng(1111)
    randoms = 0
    while randoms < 60:
        n = int(rng.integers(4, 9))
        G = sample_gnp(n, float(rng.uniform(0.4, 0.9)), int(rng.integers(2**31)))
        if G.m > oracles.MAX_ORACLE_EDGES:
            continue
        for kind, prop in (("connectivity", Connectivity()), ("hamiltonicity", Hamiltonicity())):
            if not prop.check(G).holds:
                continue
            est = estimate_local_resilience(G, prop)
            want = float(oracles.brute_local_resilience(G, kind))
            cases += 1
            randoms += 1
            mismatches += abs(est.upper - want) > 1e-12 or not est.exact
    record(11, "Resilience exactness", mismatches == 0, f"{cases} cases, {mismatches} mismatches")


def test_c12_directed_reduction():
    rng = make_rng(1212)
    bad = 0
    for i in range(1000):
        n = int(rng.integers(2, 9))
        q = float(rng.uniform(0.2, 1.0))
        D = Digraph(n, [(u, v) for u in range(n) for v in range(n)
                        if u != v and rng.random() < q])
        G = to_bipartite(D)
        bad += from_bipartite(G) != D
        bad += delta_zero(D) != min_degree(G)
        if D.m:
            a = play_directed_game(D, 1, RandomMaker(), make_breaker("random"), MinDegree(1),
                                   seed=i, trace=True)
            c = play_game(G, 1, RandomMaker(), make_breaker("random"), MinDegree(1), seed=i,
                          trace=True)
            bad += a.result.trace_jsonl() != c.trace_jsonl()
            bad += to_bipartite(a.maker_digraph) != c.maker_graph
    record(12, "Directed reduction", bad == 0, f"1000 digraphs, {bad} discrepancies")


def test_c13_reproducibility(tmp_path):
    cfgs = [ExperimentConfig(scenario="game", n=48, trials=6, biases=[1, 2], seed=13),
            ExperimentConfig(scenario="minbox", n=60, trials=6, seed=13, allow_extra=True),
            ExperimentConfig(scenario="tree-game", n=40, trials=4, trees=3, seed=13, C=8.0),
            ExperimentConfig(scenario="resilience", n=24, p=0.5, trials=4, seed=13),
            ExperimentConfig(scenario="boosters", n=10, p=0.5, trials=4, seed=13)]
    bad = []
    for cfg in cfgs:
        outs = []
        for tag, workers in (("a", 1), ("b", 1), ("c", 4)):
            d = tmp_path / f"{cfg.scenario}-{tag}"
            run_experiment(cfg, d, workers=workers)
            outs.append(((d / "records.jsonl").read_bytes(), (d / "summary.csv").read_bytes()))
        if not outs[0] == outs[1] == outs[2]:
            bad.append(cfg.scenario)
    record(13, "Reproducibility", not bad, f"{len(cfgs)} scenarios at 1 and 4 workers, "
           f"differing: {bad}")
