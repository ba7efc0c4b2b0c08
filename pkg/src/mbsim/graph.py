"""Undirected simple graphs on vertices 0..n-1 and seeded random samplers.

Edges are stored as an (m, 2) int array sorted lexicographically with u < v.
The position of an edge in that array is its *edge id*; boards, traces and
samplers all index edges this way.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class Seed:
    """A master seed plus a stream id; equal pairs give equal random streams."""

    value: int
    stream: int = 0

    def spawn(self, stream: int) -> "Seed":
        return Seed(self.value, stream)

    def rng(self, *extra: int) -> np.random.Generator:
        return make_rng(self, *extra)


def make_rng(seed: "Seed | int | None", *extra: int) -> np.random.Generator:
    """Philox generator keyed by (value, stream, *extra) through a SeedSequence."""
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        seed = Seed(0)
    if isinstance(seed, (int, np.integer)):
        seed = Seed(int(seed))
    if seed.value < 0 or seed.stream < 0:
        raise ParameterError("seed value and stream must be non-negative")
    ss = np.random.SeedSequence(seed.value & (2**64 - 1), spawn_key=(seed.stream, *extra))
    return np.random.Generator(np.random.Philox(ss))


def _pairs_array(pairs) -> np.ndarray:
    arr = np.asarray(pairs, dtype=np.int64)
    if arr.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ParameterError("edges must be pairs")
    return arr


class Graph:
    """Immutable simple graph.

    Build with ``Graph(n, edges)``; edge order and orientation in the input do
    not matter.  Self-loops and repeated edges raise :class:`ParameterError`.
    """

    __slots__ = ("n", "_edges", "__dict__")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] | np.ndarray = ()):
        if n < 0:
            raise ParameterError("vertex count must be non-negative")
        arr = _pairs_array(list(edges) if not isinstance(edges, np.ndarray) else edges)
        if len(arr):
            if arr.min() < 0 or arr.max() >= n:
                raise ParameterError("edge endpoint out of range")
            if np.any(arr[:, 0] == arr[:, 1]):
                raise ParameterError("self-loops are not allowed")
            arr = np.sort(arr, axis=1)
            order = np.lexsort((arr[:, 1], arr[:, 0]))
            arr = arr[order]
            if np.any(np.all(arr[1:] == arr[:-1], axis=1)):
                raise ParameterError("duplicate edge")
        self.n = int(n)
        self._edges = np.ascontiguousarray(arr, dtype=np.int64)
        self._edges.setflags(write=False)

    @classmethod
    def _trusted(cls, n: int, sorted_edges: np.ndarray) -> "Graph":
        g = cls.__new__(cls)
        g.n = int(n)
        g._edges = np.ascontiguousarray(sorted_edges, dtype=np.int64)
        g._edges.setflags(write=False)
        return g

    # -- basic queries -------------------------------------------------
    @property
    def edge_array(self) -> np.ndarray:
        return self._edges

    @property
    def m(self) -> int:
        return len(self._edges)

    def edges(self) -> list[tuple[int, int]]:
        return [(int(u), int(v)) for u, v in self._edges]

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self._edges, other._edges)

    def __hash__(self) -> int:
        return hash((self.n, self._edges.tobytes()))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.bincount(self._edges.ravel(), minlength=self.n).astype(np.int64)
        deg.setflags(write=False)
        return deg

    def degree(self, v: int) -> int:
        return int(self.degrees[v])

    @cached_property
    def _csr(self) -> tuple[np.ndarray, np.ndarray]:
        both = np.concatenate([self._edges, self._edges[:, ::-1]])
        order = np.lexsort((both[:, 1], both[:, 0]))
        both = both[order]
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(both[:, 0], minlength=self.n), out=indptr[1:])
        return indptr, both[:, 1].copy()

    def neighbors(self, v: int) -> np.ndarray:
        """Sorted neighbor array of v."""
        indptr, idx = self._csr
        return idx[indptr[v]:indptr[v + 1]]

    @cached_property
    def adj(self) -> list[set[int]]:
        indptr, idx = self._csr
        return [set(idx[indptr[v]:indptr[v + 1]].tolist()) for v in range(self.n)]

    @cached_property
    def adj_bits(self) -> list[int]:
        bits = [0] * self.n
        for u, v in self._edges.tolist():
            bits[u] |= 1 << v
            bits[v] |= 1 << u
        return bits

    @cached_property
    def adj_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=bool)
        if self.m:
            a[self._edges[:, 0], self._edges[:, 1]] = True
            a[self._edges[:, 1], self._edges[:, 0]] = True
        a.setflags(write=False)
        return a

    @cached_property
    def edge_index(self) -> np.ndarray:
        """n x n matrix mapping a vertex pair to its edge id (or -1)."""
        idx = np.full((self.n, self.n), -1, dtype=np.int64)
        ids = np.arange(self.m)
        if self.m:
            idx[self._edges[:, 0], self._edges[:, 1]] = ids
            idx[self._edges[:, 1], self._edges[:, 0]] = ids
        idx.setflags(write=False)
        return idx

    def has_edge(self, u: int, v: int) -> bool:
        if u == v:
            return False
        return v in self.adj[u]

    def edge_id(self, u: int, v: int) -> int:
        return int(self.edge_index[u, v])

    # -- derived graphs -----------------------------------------------
    def edge_subgraph(self, keep: np.ndarray) -> "Graph":
        """Subgraph on the same vertex set from a boolean mask or id array over edges."""
        keep = np.asarray(keep)
        return Graph._trusted(self.n, self._edges[keep])

    def add_edges(self, pairs: Iterable[tuple[int, int]]) -> "Graph":
        extra = [tuple(sorted(p)) for p in pairs if not self.has_edge(*p)]
        return Graph(self.n, self.edges() + sorted(set(extra)))

    def remove_edges(self, pairs: Iterable[tuple[int, int]]) -> "Graph":
        drop = {tuple(sorted(p)) for p in pairs}
        mask = np.array([(u, v) not in drop for u, v in self._edges.tolist()], dtype=bool)
        return self.edge_subgraph(mask)

    def induced(self, vertices: Iterable[int]) -> tuple["Graph", list[int]]:
        """Induced subgraph relabelled to 0..k-1, plus the list mapping new -> old."""
        verts = sorted(set(vertices))
        pos = {v: i for i, v in enumerate(verts)}
        sub = [(pos[u], pos[v]) for u, v in self._edges.tolist() if u in pos and v in pos]
        return Graph(len(verts), sub), verts

    def union(self, other: "Graph") -> "Graph":
        if other.n != self.n:
            raise ParameterError("vertex counts differ")
        return Graph(self.n, sorted(set(self.edges()) | set(other.edges())))

    def is_subgraph_of(self, other: "Graph") -> bool:
        if self.n != other.n:
            return False
        return all(other.has_edge(u, v) for u, v in self._edges.tolist())

    def components(self) -> list[list[int]]:
        seen = [False] * self.n
        comps = []
        adj = self.adj
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            comp, stack = [s], [s]
            while stack:
                u = stack.pop()
                for w in adj[u]:
                    if not seen[w]:
                        seen[w] = True
                        comp.append(w)
                        stack.append(w)
            comps.append(sorted(comp))
        return comps

    # -- serialization -------------------------------------------------
    def to_edgelist(self) -> str:
        buf = io.StringIO()
        buf.write(f"{self.n} {self.m}\n")
        for u, v in self._edges.tolist():
            buf.write(f"{u} {v}\n")
        return buf.getvalue()

    @classmethod
    def from_edgelist(cls, text: str) -> "Graph":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ParameterError("empty edge list")
        n, m = (int(t) for t in lines[0].split())
        pairs = [tuple(int(t) for t in ln.split()) for ln in lines[1:]]
        if len(pairs) != m:
            raise ParameterError(f"header says {m} edges, found {len(pairs)}")
        return cls(n, pairs)


def min_degree(G: Graph) -> int:
    if G.n < 1:
        raise ParameterError("min_degree needs at least one vertex")
    return int(G.degrees.min())


def _check_prob(p: float) -> None:
    if not (0.0 <= p <= 1.0) or p != p:
        raise ParameterError(f"probability must lie in [0, 1], got {p}")


def complete_pairs(n: int) -> np.ndarray:
    iu, ju = np.triu_indices(n, k=1)
    return np.stack([iu, ju], axis=1).astype(np.int64)


def sample_gnp(n: int, p: float, seed: Seed | int) -> Graph:
    """G(n, p): one uniform per pair, pairs visited in lexicographic order."""
    if n < 1:
        raise ParameterError("n must be at least 1")
    _check_prob(p)
    pairs = complete_pairs(n)
    u = make_rng(seed).random(len(pairs))
    return Graph._trusted(n, pairs[u < p])


def sample_subgraph(G: Graph, p: float, seed: Seed | int) -> Graph:
    """G(G, p): keep each edge independently, one uniform per edge in id order."""
    _check_prob(p)
    u = make_rng(seed).random(G.m)
    return G.edge_subgraph(u < p)


# -- small named graphs used by tests and the CLI --------------------------

def complete_graph(n: int) -> Graph:
    return Graph._trusted(n, complete_pairs(n))


def empty_graph(n: int) -> Graph:
    return Graph(n, [])


def path_graph(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ParameterError("a cycle needs at least 3 vertices")
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def star_graph(leaves: int) -> Graph:
    return Graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def wheel_graph(rim: int) -> Graph:
    """Hub 0 joined to a cycle on 1..rim."""
    rim_edges = [(1 + i, 1 + (i + 1) % rim) for i in range(rim)]
    return Graph(rim + 1, [(0, i) for i in range(1, rim + 1)] + rim_edges)


def petersen_graph() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return Graph(10, outer + spokes + inner)


def complete_bipartite(a: int, b: int) -> Graph:
    return Graph(a + b, [(i, a + j) for i in range(a) for j in range(b)])
