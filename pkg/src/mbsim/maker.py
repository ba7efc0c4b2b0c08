"""Maker's randomized strategy S_M.

Maker keeps a hidden random subgraph G' of the host G and reveals it lazily.
Each vertex v owns a MinBox box F_v of size 4 d_G(v) in a simulated MinBox
game with target fraction p/2 and bias 2b; every Breaker edge uv fills one
element of F_u and one of F_v.  On his turn Maker picks the box S would play,
tosses coins for the still-unexposed edges at that vertex in ascending
neighbour order and claims the first success if it is still free.

Stage 1 ends when no free active box remains; Stage 2 tosses the coins of all
pairs that were never exposed, which only affects the failure counters.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .engine import MakerStrategy, OwnershipBoard
from .errors import ConfigurationError, InvariantViolation, ParameterError, ProtocolViolation
from .graph import Graph, make_rng
from .minbox import BOUND_SLACK, MinBoxState

STAGE_ONE = "one"
STAGE_TWO = "two"
STAGE_DONE = "done"

MAX_EPS = 0.01


def sm_bias(p: float, eps: float) -> int:
    return int(math.floor(eps / (20.0 * p)))


def check_hypotheses(G: Graph, p: float, eps: float, mode: str = "strict") -> list[str]:
    """Failed hypotheses as readable inequalities (empty when all hold).

    ``strict`` checks the hypotheses of the main theorem.  ``desk`` keeps
    b = floor(eps/(20p)) >= 1 and replaces the other two by
    delta*p > 2(ln n + 1), which is what the Breaker-degree gate needs.
    """
    n = G.n
    delta = int(G.degrees.min()) if n else 0
    out = []
    if not 0.0 < p < 1.0:
        out.append(f"0 < p < 1 fails: p = {p}")
        return out
    if eps <= 0:
        out.append(f"eps > 0 fails: eps = {eps}")
        return out
    b = sm_bias(p, eps)
    if b < 1:
        out.append(f"floor(eps/(20p)) >= 1 fails: eps/(20p) = {eps / (20 * p):.4g}")
    if mode == "strict":
        if eps > MAX_EPS:
            out.append(f"eps <= 1/100 fails: eps = {eps}")
        need = 10.0 * math.log(n) / (eps * p)
        if delta < need:
            out.append(f"delta(G) >= 10 ln n/(eps p) fails: {delta} < {need:.6g}")
    elif mode == "desk":
        need = 2.0 * (math.log(n) + 1.0)
        if not delta * p > need:
            out.append(f"delta(G) p > 2(ln n + 1) fails: {delta * p:.6g} <= {need:.6g}")
    elif mode != "unchecked":
        raise ParameterError(f"unknown mode {mode!r}")
    return out


def desk_parameters(n: int, C: float = 3.0, kappa: float = 0.1) -> tuple[float, float, int]:
    """(p, eps, b) for K_n at desk scale: p = C ln n/n, b = max(1, floor(kappa/p)),
    eps just above 20 b p so that floor(eps/(20p)) = b."""
    p = C * math.log(n) / n
    b = max(1, int(math.floor(kappa / p)))
    eps = 20.0 * b * p * (1.0 + 1e-12)
    return p, eps, b


@dataclass
class SMState:
    G: Graph
    p: float
    eps: float
    b: int
    rng: np.random.Generator
    U: np.ndarray
    fI: np.ndarray
    fII: np.ndarray
    fII_stage2: np.ndarray
    maker_deg: np.ndarray
    sim: MinBoxState
    gprime: np.ndarray  # per host edge: entered G'
    exposed: np.ndarray  # per host edge: coin already tossed
    mode: str = "strict"
    stage: str = STAGE_ONE
    residue_pairs: int | None = None
    gate_violations: int = 0
    turns: int = 0
    events: dict = field(default_factory=lambda: {"a": 0, "b": 0, "c": 0})

    @property
    def n(self) -> int:
        return self.G.n

    @property
    def degrees(self) -> np.ndarray:
        return self.G.degrees

    def u_size(self, v: int) -> int:
        return int(self.U[v].sum())

    def gprime_graph(self) -> Graph:
        return self.G.edge_subgraph(self.gprime)

    def gprime_degrees(self) -> np.ndarray:
        e = self.G.edge_array[self.gprime]
        return np.bincount(e.ravel(), minlength=self.n).astype(np.int64)


def sm_init(G: Graph, p: float, eps: float, seed=0, mode: str = "strict") -> SMState:
    """Fresh S_M state on host G.  Raises ConfigurationError naming every failed hypothesis."""
    failed = check_hypotheses(G, p, eps, mode)
    if failed:
        raise ConfigurationError("; ".join(failed))
    if G.n < 1 or G.m < 1:
        raise ConfigurationError("host graph has no edges")
    d = G.degrees
    if d.min() < 1:
        raise ConfigurationError("host graph has an isolated vertex")
    b = max(sm_bias(p, eps), 1)
    n = G.n
    sim = MinBoxState(4 * d, p / 2.0, 2 * b)
    return SMState(
        G=G, p=float(p), eps=float(eps), b=b, rng=make_rng(seed),
        U=G.adj_matrix.copy(),
        fI=np.zeros(n, np.int64), fII=np.zeros(n, np.int64), fII_stage2=np.zeros(n, np.int64),
        maker_deg=np.zeros(n, np.int64), sim=sim,
        gprime=np.zeros(G.m, bool), exposed=np.zeros(G.m, bool), mode=mode,
    )


def _check_box(state: SMState, v: int) -> None:
    sim = state.sim
    d = int(state.degrees[v])
    if sim.w_M[v] + sim.w_B[v] > 4 * d:
        raise InvariantViolation(f"box of vertex {v} overfilled")
    if sim.w_B[v] > d:
        raise InvariantViolation(f"box of vertex {v} holds more Breaker elements than d(v)")
    if not sim.w_M[v] < 1 + (1 + 2 * state.p) * d:
        raise InvariantViolation(f"box of vertex {v} holds too many Maker elements")


def _claim_box(state: SMState, v: int, count: int = 1) -> int:
    try:
        return state.sim.claim_maker(v, count)
    except ProtocolViolation as exc:
        raise InvariantViolation(f"box of vertex {v} exhausted") from exc


def sm_on_breaker_move(state: SMState, edges, board: OwnershipBoard | None = None) -> None:
    """Charge one element of F_u and of F_v for every Breaker edge uv."""
    sim = state.sim
    touched = []
    for e in edges:
        u, v = (int(x) for x in (state.G.edge_array[e] if np.ndim(e) == 0 else e))
        for w in (u, v):
            try:
                sim.claim_breaker_one(w)
            except ProtocolViolation as exc:
                raise InvariantViolation(f"box of vertex {w} exhausted") from exc
            touched.append(w)
    if not touched:
        return
    if sim.max_active_danger() > sim.bound() + BOUND_SLACK:
        raise InvariantViolation("simulated MinBox danger exceeded its bound")
    for w in touched:
        _check_box(state, w)
        # d_B(v) equals w_B(F_v): each Breaker edge at v charged F_v once
        if sim.w_M[w] < sim.need[w] and not sim.w_B[w] < state.eps * state.degrees[w] / 4.0:
            if state.mode == "unchecked":
                state.gate_violations += 1
            else:
                raise InvariantViolation(f"Breaker degree gate failed at active vertex {w}")


def sm_maker_turn(state: SMState, board: OwnershipBoard | None) -> int | None:
    """One Maker move; returns a host edge id to claim or None to pass.

    ``board`` None means no edge is free any more (all successes fail).
    """
    if state.stage != STAGE_ONE:
        return None
    sim = state.sim
    v = sim.select_S()
    if v is None:
        sm_stage2(state)
        return None
    state.turns += 1
    _claim_box(state, v, 1)
    cand = np.flatnonzero(state.U[v])
    G = state.G
    k = int(state.rng.geometric(state.p)) if len(cand) else 1
    if k > len(cand):
        # type-I failure: every coin came up tails (or there were none)
        state.events["a"] += 1
        state.fI[v] += 1
        if state.fI[v] > 1:
            raise InvariantViolation(f"second type-I failure at vertex {v}")
        extra = min(int(sim.need[v]) - 1, sim.free_count(v))
        if extra > 0:
            _claim_box(state, v, extra)
        if len(cand):
            state.exposed[G.edge_index[v, cand]] = True
        state.U[v, cand] = False
        state.U[cand, v] = False
        _check_box(state, v)
        return None
    tossed = cand[:k]
    u = int(tossed[-1])
    state.exposed[G.edge_index[v, tossed]] = True
    state.U[v, tossed] = False
    state.U[tossed, v] = False
    eid = int(G.edge_index[v, u])
    state.gprime[eid] = True
    if board is not None and board.is_free(eid):
        state.events["c"] += 1
        _claim_box(state, u, 1)
        state.maker_deg[v] += 1
        state.maker_deg[u] += 1
        _check_box(state, v)
        _check_box(state, u)
        return eid
    state.events["b"] += 1
    state.fII[v] += 1
    _check_box(state, v)
    return None


def sm_stage2(state: SMState) -> None:
    """Toss the coins of every pair still unexposed, in lexicographic order."""
    if state.stage == STAGE_DONE:
        return
    state.stage = STAGE_TWO
    iu, ju = np.nonzero(np.triu(state.U, 1))
    state.residue_pairs = int(len(iu))
    if len(iu):
        hit = state.rng.random(len(iu)) < state.p
        eids = state.G.edge_index[iu, ju]
        state.exposed[eids] = True
        state.gprime[eids[hit]] = True
        np.add.at(state.fII_stage2, iu[hit], 1)
        np.add.at(state.fII_stage2, ju[hit], 1)
    state.U[:] = False
    state.stage = STAGE_DONE


def sm_final_report(state: SMState, include_stage2: bool = True) -> list[dict]:
    """Per-vertex counters with the two Claim-style flags.

    ``fII`` counts Stage-1 type-II failures, plus the phantom Stage-2 ones when
    ``include_stage2`` is set.
    """
    d = state.degrees
    dg = state.gprime_degrees()
    fII = state.fII + (state.fII_stage2 if include_stage2 else 0)
    fII_cap = 0.9 * state.eps * d * state.p
    gp_floor = 0.9 * d * state.p
    rows = []
    for v in range(state.n):
        rows.append({
            "vertex": v,
            "d_G": int(d[v]),
            "d_Gprime": int(dg[v]),
            "d_Maker": int(state.maker_deg[v]),
            "fI": int(state.fI[v]),
            "fII": int(fII[v]),
            "fII_flag": bool(fII[v] > fII_cap[v]),
            "gprime_flag": bool(dg[v] < gp_floor[v]),
        })
    return rows


def report_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def report_summary(state: SMState) -> dict:
    rows = sm_final_report(state)
    d = state.degrees.astype(float)
    fII = state.fII + state.fII_stage2
    return {
        "stage": state.stage,
        "residue_pairs": state.residue_pairs,
        "residue": bool(state.residue_pairs),
        "fII_flagged": int(sum(r["fII_flag"] for r in rows)),
        "fII_flagged_stage1": int(np.sum(state.fII > 0.9 * state.eps * d * state.p)),
        "gprime_flagged": int(sum(r["gprime_flag"] for r in rows)),
        "max_fII_ratio": float(np.max(fII / d)),
        "max_fI": int(state.fI.max()),
        "min_maker_degree": int(state.maker_deg.min()),
        "gate_violations": state.gate_violations,
        "turns": state.turns,
        "events": dict(state.events),
    }


class SMStrategy(MakerStrategy):
    """S_M as an engine strategy.  After the board is exhausted Maker keeps
    taking his (now empty-handed) turns until Stage 2 has run."""

    name = "sm"

    def __init__(self, p: float, eps: float, mode: str = "desk"):
        self.p = p
        self.eps = eps
        self.mode = mode
        self.state: SMState | None = None

    def start(self, board, rng):
        super().start(board, rng)
        self.state = sm_init(board.G, self.p, self.eps, rng, self.mode)
        if board.b > self.state.b:
            raise ConfigurationError(
                f"game bias {board.b} exceeds floor(eps/(20p)) = {self.state.b}")
        self.finished = False

    def observe_breaker(self, board, claimed):
        sm_on_breaker_move(self.state, claimed)

    def move(self, board):
        mv = sm_maker_turn(self.state, board)
        if self.state.stage == STAGE_DONE:
            self.finished = True
        return mv

    def finish(self, board):
        st = self.state
        if board.n_free == 0:
            while st.stage != STAGE_DONE:
                sm_maker_turn(st, None)
        self.finished = st.stage == STAGE_DONE

    def report(self) -> dict:
        return report_summary(self.state) if self.state is not None else {}
