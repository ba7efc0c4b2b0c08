"""The MinBox(n, D, alpha, b) game and Maker's max-danger strategy S.

Maker wants at least ``alpha*|F|`` elements of every box ``F``; Breaker claims
``b`` elements per turn and moves first.  The danger of a box is
``w_B - b*w_M``.  Strategy S claims one element from a free active box of
maximal danger, ties broken towards the lowest box index.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ParameterError, ProtocolViolation
from .graph import Seed, make_rng

PASS = None
BOUND_SLACK = 1e-9


def danger_bound(n: int, b: int) -> float:
    """b(ln n + 1): the largest danger an active box reaches under S."""
    return b * (math.log(n) + 1.0)


def winning_min_size(n: int, b: int, alpha: float) -> float:
    """Smallest box size for which S is guaranteed to leave no active box."""
    if not alpha < 1.0 / (1 + b):
        raise ParameterError("winning condition needs alpha < 1/(1+b)")
    return danger_bound(n, b) / (1.0 - alpha * (b + 1))


@dataclass
class MinBoxParams:
    sizes: Sequence[int]
    alpha: float
    b: int

    def __post_init__(self):
        self.sizes = [int(s) for s in self.sizes]
        if not self.sizes:
            raise ParameterError("need at least one box")
        if min(self.sizes) < 1:
            raise ParameterError("box sizes must be at least 1")
        if not 0.0 < self.alpha < 1.0:
            raise ParameterError("alpha must lie in (0, 1)")
        if self.b < 1:
            raise ParameterError("Breaker's bias must be at least 1")

    @property
    def n(self) -> int:
        return len(self.sizes)

    @property
    def D(self) -> int:
        return min(self.sizes)

    @classmethod
    def uniform(cls, n: int, D: int, alpha: float, b: int) -> "MinBoxParams":
        return cls([D] * n, alpha, b)


class MinBoxState:
    """Box counts for one running MinBox game.

    ``need[i]`` is the number of Maker elements that makes box i inactive,
    i.e. ``ceil(alpha*size)``; activity is always recomputed from ``w_M``.
    """

    def __init__(self, sizes, alpha: float, b: int):
        self.sizes = np.asarray(sizes, dtype=np.int64).copy()
        if self.sizes.ndim != 1 or len(self.sizes) == 0:
            raise ParameterError("sizes must be a non-empty 1-d sequence")
        if self.sizes.min() < 1:
            raise ParameterError("box sizes must be at least 1")
        if not 0.0 < alpha < 1.0:
            raise ParameterError("alpha must lie in (0, 1)")
        if b < 1:
            raise ParameterError("Breaker's bias must be at least 1")
        self.alpha = float(alpha)
        self.b = int(b)
        n = len(self.sizes)
        self.w_M = np.zeros(n, dtype=np.int64)
        self.w_B = np.zeros(n, dtype=np.int64)
        # alpha*size is compared with a tiny tolerance against float noise
        self.need = np.ceil(self.alpha * self.sizes - 1e-9).astype(np.int64)
        self.total_free = int(self.sizes.sum())
        self._frozen_max = -math.inf
        self._heap = [(0, i) for i in range(n)]
        heapq.heapify(self._heap)

    @classmethod
    def from_params(cls, params: MinBoxParams) -> "MinBoxState":
        return cls(params.sizes, params.alpha, params.b)

    # -- queries ----------------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.sizes)

    @property
    def D(self) -> int:
        return int(self.sizes.min())

    def free_count(self, i: int) -> int:
        return int(self.sizes[i] - self.w_M[i] - self.w_B[i])

    def is_free(self, i: int) -> bool:
        return self.free_count(i) > 0

    def is_active(self, i: int) -> bool:
        return bool(self.w_M[i] < self.need[i])

    def danger(self, i: int) -> int:
        return int(self.w_B[i] - self.b * self.w_M[i])

    def dangers(self) -> np.ndarray:
        return self.w_B - self.b * self.w_M

    def free_mask(self) -> np.ndarray:
        return self.sizes - self.w_M - self.w_B > 0

    def active_mask(self) -> np.ndarray:
        return self.w_M < self.need

    def bound(self) -> float:
        return danger_bound(self.n, self.b)

    def max_active_danger(self) -> float:
        """Largest danger over active boxes, free or not; -inf if none."""
        top = self._peek()
        best = self._frozen_max
        if top is not None:
            best = max(best, self.danger(top))
        return best

    def snapshot(self) -> list[dict]:
        return [
            {"size": int(s), "w_M": int(m), "w_B": int(b), "free": int(s - m - b),
             "active": bool(m < nd)}
            for s, m, b, nd in zip(self.sizes, self.w_M, self.w_B, self.need)
        ]

    # -- heap bookkeeping -----------------------------------------------
    def _touch(self, i: int) -> None:
        if self.w_M[i] >= self.need[i]:
            return
        if self.sizes[i] - self.w_M[i] - self.w_B[i] <= 0:
            # active but exhausted: its danger can no longer change
            self._frozen_max = max(self._frozen_max, self.danger(i))
            return
        heapq.heappush(self._heap, (-self.danger(i), i))

    def _peek(self) -> int | None:
        heap = self._heap
        while heap:
            neg, i = heap[0]
            if (-neg == self.w_B[i] - self.b * self.w_M[i]
                    and self.w_M[i] < self.need[i]
                    and self.sizes[i] - self.w_M[i] - self.w_B[i] > 0):
                return i
            heapq.heappop(heap)
        return None

    # -- moves -----------------------------------------------------------
    def select_S(self) -> int | None:
        """Box strategy S would play now, or PASS when no free active box exists."""
        return self._peek()

    def maker_move_S(self) -> int | None:
        i = self.select_S()
        if i is not None:
            self.claim_maker(i)
        return i

    def claim_maker(self, i: int, count: int = 1) -> int:
        """Maker takes ``count`` free elements of box i (fewer if it runs out)."""
        k = min(count, self.free_count(i))
        if k <= 0:
            if count > 0:
                raise ProtocolViolation(f"box {i} has no free element", "maker")
            return 0
        self.w_M[i] += k
        self.total_free -= k
        self._touch(i)
        return k

    def claim_breaker_one(self, i: int) -> None:
        if self.free_count(i) <= 0:
            raise ProtocolViolation(f"Breaker claimed from exhausted box {i}", "breaker")
        self.w_B[i] += 1
        self.total_free -= 1
        self._touch(i)

    def breaker_claim(self, claims: Sequence[int]) -> None:
        if len(claims) > self.b:
            raise ProtocolViolation(
                f"Breaker claimed {len(claims)} elements with bias {self.b}", "breaker")
        for i in claims:
            self.claim_breaker_one(int(i))


def danger(state: MinBoxState, i: int) -> int:
    return state.danger(i)


def maker_move_S(state: MinBoxState) -> int | None:
    return state.maker_move_S()


def breaker_claim(state: MinBoxState, claims: Sequence[int]) -> None:
    state.breaker_claim(claims)


# -- adversaries ----------------------------------------------------------
# An adversary is called as adversary(state, stream) and returns the box index
# of each element it claims, in order; exactly min(b, total_free) of them.
# ``stream`` is a UniformStream so that the compiled self-play kernel and this
# Python path consume identical randomness.

class UniformStream:
    """Pre-drawn uniforms consumed in order; grows on demand."""

    def __init__(self, rng: np.random.Generator, size: int):
        self._rng = rng
        self.u = rng.random(max(size, 16))
        self.pos = 0

    def random(self) -> float:
        if self.pos >= len(self.u):
            self.u = np.concatenate([self.u, self._rng.random(len(self.u))])
        x = float(self.u[self.pos])
        self.pos += 1
        return x

    def integers(self, k: int) -> int:
        return int(math.floor(self.random() * k))


def random_adversary(state: MinBoxState, stream: UniformStream) -> list[int]:
    """Uniformly random free elements, without replacement."""
    k = min(state.b, state.total_free)
    free = (state.sizes - state.w_M - state.w_B).astype(np.int64)
    total = state.total_free
    out = []
    for _ in range(k):
        r = stream.integers(total)
        i = int(np.searchsorted(np.cumsum(free), r, side="right"))
        free[i] -= 1
        total -= 1
        out.append(i)
    return out


def greedy_adversary(state: MinBoxState, stream: UniformStream) -> list[int]:
    """Pile every element onto the most dangerous free active box."""
    k = min(state.b, state.total_free)
    free = state.sizes - state.w_M - state.w_B
    dang = state.dangers().astype(np.float64)
    active = state.active_mask()
    out = []
    for _ in range(k):
        cand = np.where((free > 0) & active, dang, -np.inf)
        i = int(np.argmax(cand))
        if cand[i] == -np.inf:
            i = int(np.flatnonzero(free > 0)[0])
        free[i] -= 1
        dang[i] += 1
        out.append(i)
    return out


def spread_adversary(state: MinBoxState, stream: UniformStream) -> list[int]:
    """Spread elements evenly over the free active boxes Maker has touched least.

    This is the classical Box-game attack: Maker rescues one box per turn
    while every surviving box keeps gaining danger.
    """
    k = min(state.b, state.total_free)
    free = state.sizes - state.w_M - state.w_B
    wB = state.w_B.copy()
    active = state.active_mask()
    big = np.iinfo(np.int64).max
    out = []
    for _ in range(k):
        ok = (free > 0) & active
        if not ok.any():
            i = int(np.flatnonzero(free > 0)[0])
        else:
            wm = np.where(ok, state.w_M, big)
            tier = ok & (wm == wm.min())
            i = int(np.argmin(np.where(tier, wB, big)))
        free[i] -= 1
        wB[i] += 1
        out.append(i)
    return out


ADVERSARIES: dict[str, Callable] = {
    "random": random_adversary,
    "greedy": greedy_adversary,
    "spread": spread_adversary,
}
_ADV_CODES = {"random": 0, "greedy": 1, "spread": 2}


# -- the game ----------------------------------------------------------------

@dataclass
class MinBoxTranscript:
    records: list[dict]
    final_w_M: list[int]
    final_w_B: list[int]
    bound: float
    max_danger: float
    violations: int
    active_at_end: int
    sizes: list[int] = field(default_factory=list)

    @property
    def maker_won(self) -> bool:
        return self.active_at_end == 0

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.records)


def play_minbox(params: MinBoxParams, breaker="random", allow_extra_claims: bool = False,
                seed: Seed | int = 0, extra_prob: float = 0.25, record: bool = True,
                compiled: bool | None = None) -> MinBoxTranscript:
    """Play one MinBox game, Breaker first, until every element is claimed.

    ``breaker`` is a name from ADVERSARIES or a callable adversary.  With
    ``allow_extra_claims`` Maker, after his S move, claims one more free
    element of a uniformly chosen free box with probability ``extra_prob``.
    Built-in adversaries run in a compiled kernel unless ``compiled=False``;
    both paths give identical games for the same seed.
    """
    total = int(sum(params.sizes))
    stream = UniformStream(make_rng(seed), 3 * total + 8)
    if compiled is None:
        compiled = isinstance(breaker, str)
    if compiled:
        if not isinstance(breaker, str):
            raise ParameterError("the compiled path needs a built-in adversary name")
        return _play_compiled(params, breaker, allow_extra_claims, extra_prob, stream, record)
    adversary = ADVERSARIES[breaker] if isinstance(breaker, str) else breaker
    st = MinBoxState.from_params(params)
    bound = st.bound()
    records: list[dict] = []
    violations = 0
    max_d = -math.inf
    turn = 0

    def note(mover, box):
        nonlocal violations, max_d
        d = st.max_active_danger()
        if d > bound + BOUND_SLACK:
            violations += 1
        max_d = max(max_d, d)
        if record:
            records.append({"turn": turn, "mover": mover, "box": box,
                            "danger_max_active": None if d == -math.inf else int(d)})

    while st.total_free > 0:
        turn += 1
        claims = [int(c) for c in adversary(st, stream)]
        if len(claims) != min(st.b, st.total_free):
            raise ProtocolViolation(
                f"Breaker must claim {min(st.b, st.total_free)} elements, got {len(claims)}",
                "breaker")
        st.breaker_claim(claims)
        note("breaker", claims)
        if st.total_free == 0:
            break
        box = st.maker_move_S()
        if allow_extra_claims and st.total_free > 0:
            if stream.random() < extra_prob:
                free_boxes = np.flatnonzero(st.free_mask())
                st.claim_maker(int(free_boxes[stream.integers(len(free_boxes))]))
        note("maker", box)

    return MinBoxTranscript(
        records=records,
        final_w_M=st.w_M.tolist(),
        final_w_B=st.w_B.tolist(),
        bound=bound,
        max_danger=max_d,
        violations=violations,
        active_at_end=int(st.active_mask().sum()),
        sizes=st.sizes.tolist(),
    )


def _play_compiled(params, breaker, allow_extra_claims, extra_prob, stream, record):
    from ._kernels import minbox_selfplay

    sizes = np.asarray(params.sizes, dtype=np.int64)
    need = np.ceil(params.alpha * sizes - 1e-9).astype(np.int64)
    bound = danger_bound(len(sizes), params.b)
    out = minbox_selfplay(sizes, need, int(params.b), _ADV_CODES[breaker],
                          float(extra_prob) if allow_extra_claims else 0.0,
                          stream.u, bound + BOUND_SLACK, record)
    w_M, w_B, max_d, violations, k, movers, boxes, dmax, claims = out
    records = []
    if record:
        offsets = [int(boxes[j]) for j in range(k) if movers[j] == 0]
        offsets.append(int(w_B.sum()))
        turn = 0
        for j in range(k):
            d = dmax[j]
            dd = None if d == -math.inf else int(d)
            if movers[j] == 0:
                a, z = offsets[turn], offsets[turn + 1]
                turn += 1
                records.append({"turn": turn, "mover": "breaker",
                                "box": claims[a:z].tolist(), "danger_max_active": dd})
            else:
                b = int(boxes[j])
                records.append({"turn": turn, "mover": "maker",
                                "box": None if b < 0 else b, "danger_max_active": dd})
    return MinBoxTranscript(
        records=records,
        final_w_M=w_M.tolist(),
        final_w_B=w_B.tolist(),
        bound=bound,
        max_danger=float(max_d),
        violations=int(violations),
        active_at_end=int((w_M < need).sum()),
        sizes=sizes.tolist(),
    )
