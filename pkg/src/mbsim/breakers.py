"""Breaker adversaries.  None is claimed optimal; they exist to stress Maker."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import BreakerStrategy, OwnershipBoard
from .errors import ParameterError


def breaker_random(board: OwnershipBoard, b: int, rng: np.random.Generator) -> list[int]:
    """b distinct uniform free edges (fewer only if the board runs out)."""
    if b < 1:
        raise ParameterError("bias b must be at least 1")
    if board.n_free < 1:
        raise ParameterError("no free edge left")
    k = min(b, board.n_free)
    picks = rng.choice(board.n_free, size=k, replace=False)
    return [board.free_id_at(int(i)) for i in picks]


def _fill_random(board, chosen, k, rng):
    if len(chosen) < k:
        taken = set(chosen)
        rest = [int(e) for e in board.sorted_free_ids() if int(e) not in taken]
        extra = rng.choice(len(rest), size=k - len(chosen), replace=False)
        chosen += [rest[i] for i in sorted(extra.tolist())]
    return chosen


def breaker_isolator(board: OwnershipBoard, b: int) -> list[int]:
    """Surround a vertex Maker has not touched, the one with most free edges first.

    Claims free edges at that vertex in ascending neighbour order and spills to
    the next such vertex.  Maker-touched vertices follow in the same order once
    the untouched ones run dry.
    """
    if b < 1:
        raise ParameterError("bias b must be at least 1")
    if board.n_free < 1:
        raise ParameterError("no free edge left")
    k = min(b, board.n_free)
    fd = board.free_deg
    live = fd > 0
    chosen: list[int] = []
    taken: set[int] = set()
    for group in (live & (board.maker_deg == 0), live & (board.maker_deg > 0)):
        cand = np.flatnonzero(group)
        for v in cand[np.argsort(-fd[cand], kind="stable")].tolist():
            for e in board.incident_free(v).tolist():
                if e not in taken:
                    chosen.append(e)
                    taken.add(e)
                    if len(chosen) == k:
                        return chosen
    # every free edge has an endpoint in ``order`` so this is not reached
    raise AssertionError("isolator ran out of candidate edges")


def breaker_max_maker_degree(board: OwnershipBoard, b: int, rng: np.random.Generator) -> list[int]:
    """Claim free edges at the vertex of largest Maker degree, one at a time."""
    if b < 1:
        raise ParameterError("bias b must be at least 1")
    if board.n_free < 1:
        raise ParameterError("no free edge left")
    k = min(b, board.n_free)
    md = board.maker_deg
    touched = np.flatnonzero(md > 0).tolist()
    order = sorted(touched, key=lambda v: (-int(md[v]), v))
    chosen: list[int] = []
    taken: set[int] = set()
    for _ in range(k):
        pick = None
        for v in order:
            free = [e for e in board.incident_free(v).tolist() if e not in taken]
            if free:
                pick = free[int(rng.integers(len(free)))]
                break
        if pick is None:
            break
        chosen.append(pick)
        taken.add(pick)
    return _fill_random(board, chosen, k, rng)


class RandomBreaker(BreakerStrategy):
    name = "random"

    def move(self, board):
        return breaker_random(board, board.b, self.rng)


class IsolatorBreaker(BreakerStrategy):
    name = "isolator"

    def move(self, board):
        return breaker_isolator(board, board.b)


class MaxMakerDegreeBreaker(BreakerStrategy):
    name = "max-maker-degree"

    def move(self, board):
        return breaker_max_maker_degree(board, board.b, self.rng)


class ScriptedBreaker(BreakerStrategy):
    """Replays a fixed list of moves, each a list of vertex pairs."""

    name = "scripted"

    def __init__(self, moves):
        self.moves = [list(m) for m in moves]
        self.turn = 0

    def start(self, board, rng):
        super().start(board, rng)
        self.turn = 0

    def move(self, board):
        if self.turn >= len(self.moves):
            raise ParameterError("scripted breaker ran out of moves")
        mv = self.moves[self.turn]
        self.turn += 1
        return [board.G.edge_id(u, v) for u, v in mv]


@dataclass(frozen=True)
class BreakerSpec:
    """Adversary kind plus the seed of its private stream (see ``play_game``)."""

    kind: str
    seed: int = 0
    script: tuple = ()

    def build(self) -> BreakerStrategy:
        return make_breaker(self.kind, self.script)


BREAKERS = {
    "random": RandomBreaker,
    "isolator": IsolatorBreaker,
    "max-maker-degree": MaxMakerDegreeBreaker,
}


def make_breaker(kind: str, script=()) -> BreakerStrategy:
    if kind == "scripted":
        return ScriptedBreaker(script)
    try:
        return BREAKERS[kind]()
    except KeyError:
        raise ParameterError(f"unknown breaker {kind!r}") from None
