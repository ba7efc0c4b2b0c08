"""Biased Maker-Breaker game on the edges of a base graph.

Breaker moves first and claims ``b`` free edges per turn (fewer only when the
board runs out); Maker then claims one free edge or passes.  Strategies see a
shared :class:`OwnershipBoard` and return edge ids.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .checkers import CheckResult, Property, property_from_id
from .errors import ParameterError, ProtocolViolation
from .graph import Graph, Seed, make_rng

FREE = 0
MAKER = 1
BREAKER = 2

MAKER_STREAM = 1
BREAKER_STREAM = 2


class OwnershipBoard:
    """Owner of every edge of the base graph plus per-vertex degree counters."""

    def __init__(self, G: Graph, b: int):
        if b < 1:
            raise ParameterError("bias b must be at least 1")
        self.G = G
        self.b = int(b)
        m = G.m
        self.owner = np.zeros(m, dtype=np.int8)
        self._pool = np.arange(m, dtype=np.int64)
        self._pos = np.arange(m, dtype=np.int64)
        self.n_free = m
        self.free_deg = G.degrees.copy()
        self.maker_deg = np.zeros(G.n, dtype=np.int64)
        self.breaker_deg = np.zeros(G.n, dtype=np.int64)
        self.maker_ids: list[int] = []
        self.breaker_ids: list[int] = []

    def is_free(self, eid: int) -> bool:
        return 0 <= eid < self.G.m and self.owner[eid] == FREE

    def free_ids(self) -> np.ndarray:
        """Free edge ids in no particular order (a view; do not mutate)."""
        return self._pool[:self.n_free]

    def sorted_free_ids(self) -> np.ndarray:
        return np.sort(self._pool[:self.n_free])

    def free_id_at(self, k: int) -> int:
        return int(self._pool[k])

    def claim(self, eid: int, player: int) -> None:
        if not self.is_free(eid):
            raise ProtocolViolation(f"edge {eid} is not free",
                                    "maker" if player == MAKER else "breaker")
        self.owner[eid] = player
        k = self._pos[eid]
        last = self._pool[self.n_free - 1]
        self._pool[k] = last
        self._pos[last] = k
        self._pool[self.n_free - 1] = eid
        self._pos[eid] = self.n_free - 1
        self.n_free -= 1
        u, v = self.G.edge_array[eid]
        self.free_deg[u] -= 1
        self.free_deg[v] -= 1
        if player == MAKER:
            self.maker_deg[u] += 1
            self.maker_deg[v] += 1
            self.maker_ids.append(int(eid))
        else:
            self.breaker_deg[u] += 1
            self.breaker_deg[v] += 1
            self.breaker_ids.append(int(eid))

    def claim_all_free(self, player: int) -> list[int]:
        """Give every free edge to ``player`` at once; returns their ids ascending."""
        ids = np.sort(self._pool[:self.n_free])
        if len(ids) == 0:
            return []
        self.owner[ids] = player
        self.n_free = 0
        ends = self.G.edge_array[ids].ravel()
        cnt = np.bincount(ends, minlength=self.G.n)
        self.free_deg -= cnt
        if player == MAKER:
            self.maker_deg += cnt
            self.maker_ids.extend(ids.tolist())
        else:
            self.breaker_deg += cnt
            self.breaker_ids.extend(ids.tolist())
        return ids.tolist()

    def incident_free(self, v: int) -> np.ndarray:
        """Free edge ids at v, ascending by the other endpoint."""
        nb = self.G.neighbors(v)
        ids = self.G.edge_index[v, nb]
        return ids[self.owner[ids] == FREE]

    def edge(self, eid: int) -> tuple[int, int]:
        u, v = self.G.edge_array[eid]
        return int(u), int(v)

    def maker_graph(self) -> Graph:
        return self.G.edge_subgraph(np.sort(np.array(self.maker_ids, dtype=np.int64)))

    def breaker_graph(self) -> Graph:
        return self.G.edge_subgraph(np.sort(np.array(self.breaker_ids, dtype=np.int64)))


class MakerStrategy:
    """Maker hooks.  ``move`` returns an edge id or None to pass."""

    name = "maker"
    finished = False

    def start(self, board: OwnershipBoard, rng: np.random.Generator) -> None:
        self.rng = rng

    def observe_breaker(self, board: OwnershipBoard, claimed: list[int]) -> None:
        pass

    def move(self, board: OwnershipBoard) -> int | None:
        raise NotImplementedError

    def finish(self, board: OwnershipBoard) -> None:
        pass

    def report(self) -> dict:
        return {}


class BreakerStrategy:
    """Breaker hooks.  ``move`` returns exactly min(b, free) distinct free edge ids."""

    name = "breaker"

    def start(self, board: OwnershipBoard, rng: np.random.Generator) -> None:
        self.rng = rng

    def move(self, board: OwnershipBoard) -> list[int]:
        raise NotImplementedError


class PassiveMaker(MakerStrategy):
    name = "passive"

    def move(self, board):
        return None


class RandomMaker(MakerStrategy):
    name = "random"

    def move(self, board):
        if board.n_free == 0:
            return None
        return board.free_id_at(int(self.rng.integers(board.n_free)))


class GreedyConnectivityMaker(MakerStrategy):
    """Joins two Maker components, rescuing the most endangered vertex first.

    A vertex is endangered when few free edges still lead out of its Maker
    component; the chosen edge leaves the component of the vertex with the
    fewest such edges, ties to the lowest vertex and then edge id.
    """

    name = "greedy-connectivity"

    def start(self, board, rng):
        super().start(board, rng)
        self.parent = list(range(board.G.n))
        self.merges = 0

    def _find(self, v):
        while self.parent[v] != v:
            self.parent[v] = self.parent[self.parent[v]]
            v = self.parent[v]
        return v

    def move(self, board):
        if board.n_free == 0:
            return None
        n = board.G.n
        comp = [self._find(v) for v in range(n)]
        if len(set(comp)) == 1:
            self.finished = True
            return None
        out: dict[int, list[int]] = {}
        for eid in board.sorted_free_ids().tolist():
            u, v = board.edge(eid)
            if comp[u] != comp[v]:
                out.setdefault(comp[u], []).append(eid)
                out.setdefault(comp[v], []).append(eid)
        if not out:
            return None
        root = min(out, key=lambda r: (len(out[r]), r))
        eid = out[root][0]
        u, v = board.edge(eid)
        self.parent[self._find(u)] = self._find(v)
        self.merges += 1
        self.finished = self.merges == n - 1
        return eid


@dataclass
class GameResult:
    winner: str
    maker_graph: Graph
    breaker_graph: Graph
    turns: int
    certificate: CheckResult | None
    property_name: str | None
    decided_turn: int | None = None
    fast_forwarded: int = 0
    trace: list[dict] | None = None
    maker_report: dict = field(default_factory=dict)

    def trace_jsonl(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in (self.trace or []))

    def summary(self) -> dict[str, Any]:
        return {
            "winner": self.winner,
            "turns": self.turns,
            "maker_edges": self.maker_graph.m,
            "breaker_edges": self.breaker_graph.m,
            "property": self.property_name,
            "status": self.certificate.status if self.certificate else None,
            "decided_turn": self.decided_turn,
            "fast_forwarded": self.fast_forwarded,
        }


def _as_property(prop):
    if prop is None or isinstance(prop, Property):
        return prop
    return property_from_id(prop)


def play_game(G: Graph, b: int, maker: MakerStrategy, breaker: BreakerStrategy,
              prop: Property | str | None = None, seed: Seed | int = 0,
              check_every_turn: bool = False, trace: bool = False,
              fast_forward: bool = True, check_seed: int = 0) -> GameResult:
    """Play one game to the end of the board.

    With ``check_every_turn`` the property is tested after each Maker move and
    the game stops as soon as Maker's graph has it; otherwise it is checked
    once at the end.  With ``fast_forward``, once Maker reports it is done the
    remaining free edges go to Breaker in bulk (Maker cannot lose a monotone
    property it already has, and cannot gain one by passing).
    """
    if b < 1:
        raise ParameterError("bias b must be at least 1")
    prop = _as_property(prop)
    seed = seed if isinstance(seed, Seed) else Seed(int(seed))
    board = OwnershipBoard(G, b)
    maker.start(board, make_rng(seed, MAKER_STREAM))
    breaker.start(board, make_rng(seed, BREAKER_STREAM))
    log: list[dict] | None = [] if trace else None
    turn = 0
    decided = None
    cert = None
    ff = 0
    while board.n_free > 0:
        turn += 1
        want = min(b, board.n_free)
        claims = breaker.move(board)
        claims = [int(c) for c in claims]
        if len(claims) != want:
            raise ProtocolViolation(f"breaker claimed {len(claims)} edges, expected {want}", "breaker")
        if len(set(claims)) != len(claims):
            raise ProtocolViolation("breaker claimed an edge twice", "breaker")
        for c in claims:
            if not board.is_free(c):
                raise ProtocolViolation(f"breaker claimed non-free edge {c}", "breaker")
            board.claim(c, BREAKER)
        if log is not None:
            log.append({"turn": turn, "player": "breaker", "edges": [board.edge(c) for c in claims]})
        maker.observe_breaker(board, claims)
        if board.n_free == 0:
            break
        mv = maker.move(board)
        if mv is not None:
            mv = int(mv)
            if not board.is_free(mv):
                raise ProtocolViolation(f"maker claimed non-free edge {mv}", "maker")
            board.claim(mv, MAKER)
        if log is not None:
            log.append({"turn": turn, "player": "maker",
                        "edges": [] if mv is None else [board.edge(mv)]})
        if check_every_turn and prop is not None and mv is not None:
            res = prop.check(board.maker_graph(), check_seed)
            if res.holds:
                decided, cert = turn, res
                break
        if fast_forward and maker.finished and board.n_free > 0:
            ff = board.n_free
            board.claim_all_free(BREAKER)
            turn += math.ceil(ff / b)
            if log is not None:
                log.append({"turn": turn, "player": "breaker", "fast_forward": ff})
            break
    maker.finish(board)
    MG = board.maker_graph()
    if prop is not None and cert is None:
        cert = prop.check(MG, check_seed)
        if cert.holds:
            decided = turn
    if prop is None:
        winner = "none"
    elif cert.holds:
        winner = "maker"
    elif cert.status == "unknown":
        winner = "unknown"
    else:
        winner = "breaker"
    return GameResult(winner, MG, board.breaker_graph(), turn, cert,
                      prop.name if prop is not None else None, decided, ff, log,
                      maker.report())


def check_win_claims(result: GameResult, prop: Property | str) -> bool:
    """Re-check the property on Maker's graph and compare with the declared winner."""
    prop = _as_property(prop)
    res = prop.check(result.maker_graph)
    if result.winner == "maker":
        return res.holds
    if result.winner == "breaker":
        return res.status == "no"
    return True
