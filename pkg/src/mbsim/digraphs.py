"""Digraphs and their bipartite encoding G_D.

Vertex v of D becomes a_v = v and b_v = n + v; arc (u, v) becomes the edge
a_u b_v.  Since a_u < b_v always, arcs in lexicographic order and edges of G_D
in lexicographic order line up one to one, so arc ids equal edge ids and a
directed game is exactly the undirected game on G_D.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .engine import GameResult, play_game
from .errors import ParameterError
from .graph import Graph, Seed, _check_prob, make_rng


class Digraph:
    """Loopless digraph on 0..n-1; arcs are stored sorted and deduplicated."""

    def __init__(self, n: int, arcs=()):
        if n < 0:
            raise ParameterError("n must be non-negative")
        arr = np.array(sorted({(int(u), int(v)) for u, v in arcs}), dtype=np.int64).reshape(-1, 2)
        if len(arr):
            if arr.min() < 0 or arr.max() >= n:
                raise ParameterError("arc endpoint out of range")
            if np.any(arr[:, 0] == arr[:, 1]):
                raise ParameterError("loops are not allowed")
        self.n = int(n)
        self.arc_array = arr
        self.arc_array.setflags(write=False)

    @property
    def m(self) -> int:
        return len(self.arc_array)

    def arcs(self) -> list[tuple[int, int]]:
        return [tuple(a) for a in self.arc_array.tolist()]

    def has_arc(self, u: int, v: int) -> bool:
        return bool(np.any((self.arc_array[:, 0] == u) & (self.arc_array[:, 1] == v)))

    @property
    def out_degrees(self) -> np.ndarray:
        return np.bincount(self.arc_array[:, 0], minlength=self.n)

    @property
    def in_degrees(self) -> np.ndarray:
        return np.bincount(self.arc_array[:, 1], minlength=self.n)

    def arc_subgraph(self, mask) -> "Digraph":
        D = Digraph.__new__(Digraph)
        D.n = self.n
        D.arc_array = np.ascontiguousarray(self.arc_array[np.asarray(mask)])
        D.arc_array.setflags(write=False)
        return D

    def __eq__(self, other):
        return (isinstance(other, Digraph) and self.n == other.n
                and np.array_equal(self.arc_array, other.arc_array))

    def __repr__(self):
        return f"Digraph(n={self.n}, m={self.m})"

    def to_arclist(self) -> str:
        buf = io.StringIO()
        buf.write(f"{self.n} {self.m}\n")
        for u, v in self.arc_array.tolist():
            buf.write(f"{u} {v}\n")
        return buf.getvalue()

    @classmethod
    def from_arclist(cls, text: str) -> "Digraph":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ParameterError("empty arc list")
        n, m = (int(t) for t in lines[0].split())
        arcs = [tuple(int(t) for t in ln.split()) for ln in lines[1:]]
        if len(arcs) != m:
            raise ParameterError(f"header says {m} arcs, found {len(arcs)}")
        return cls(n, arcs)


def complete_digraph(n: int) -> Digraph:
    return Digraph(n, [(u, v) for u in range(n) for v in range(n) if u != v])


def directed_cycle(n: int) -> Digraph:
    return Digraph(n, [(i, (i + 1) % n) for i in range(n)])


def delta_zero(D: Digraph) -> int:
    """min over vertices of both in- and out-degree."""
    if D.n < 1:
        raise ParameterError("delta_zero needs at least one vertex")
    return int(min(D.out_degrees.min(), D.in_degrees.min()))


def to_bipartite(D: Digraph) -> Graph:
    n = D.n
    edges = D.arc_array.copy()
    edges[:, 1] += n
    return Graph._trusted(2 * n, edges)


def from_bipartite(G: Graph) -> Digraph:
    """Inverse of :func:`to_bipartite`; rejects graphs not of that shape."""
    if G.n % 2:
        raise ParameterError("G_D has an even number of vertices")
    n = G.n // 2
    e = G.edge_array
    if len(e) and (e[:, 0].max() >= n or e[:, 1].min() < n or np.any(e[:, 1] - n == e[:, 0])):
        raise ParameterError("not the bipartite image of a loopless digraph")
    arcs = e.copy()
    arcs[:, 1] -= n
    return Digraph(n, arcs.tolist())


def arc_to_edge(n: int, u: int, v: int) -> tuple[int, int]:
    return u, n + v


def edge_to_arc(n: int, a: int, b: int) -> tuple[int, int]:
    a, b = min(a, b), max(a, b)
    return a, b - n


def sample_dnp(D: Digraph, p: float, seed: Seed | int) -> Digraph:
    """Keep each arc independently; one uniform per arc in lexicographic order,
    the same draws ``sample_subgraph`` makes on G_D."""
    _check_prob(p)
    u = make_rng(seed).random(D.m)
    return D.arc_subgraph(u < p)


@dataclass
class DirectedGameResult:
    result: GameResult
    n: int

    @property
    def winner(self) -> str:
        return self.result.winner

    @property
    def maker_digraph(self) -> Digraph:
        return from_bipartite(self.result.maker_graph)

    @property
    def breaker_digraph(self) -> Digraph:
        return from_bipartite(self.result.breaker_graph)

    def arc_trace(self) -> list[dict]:
        out = []
        for rec in self.result.trace or []:
            rec = dict(rec)
            if "edges" in rec:
                rec["arcs"] = [edge_to_arc(self.n, a, b) for a, b in rec.pop("edges")]
            out.append(rec)
        return out


def play_directed_game(D: Digraph, b: int, maker, breaker, prop=None, seed=0,
                       **kwargs) -> DirectedGameResult:
    """The game on the arcs of D, played as the undirected game on G_D.

    ``prop`` is a property of G_D (for example minimum degree k on G_D is
    delta_zero >= k on D).
    """
    res = play_game(to_bipartite(D), b, maker, breaker, prop, seed, **kwargs)
    return DirectedGameResult(res, D.n)
