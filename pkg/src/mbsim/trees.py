"""Spanning trees with a long bare path, and embedding them into a host graph.

The bare path v_0 ... v_t is contracted to a single (possibly fake) edge
v_0 v_t, which leaves the smaller tree T'.  T' is embedded into G minus a
random reserve V_0 of t - 1 vertices, and the reserve is then threaded onto a
Hamilton path between the images of v_0 and v_t.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .checkers import CheckResult, YES, Property
from .errors import ParameterError
from .graph import Graph, make_rng
from .posa import hamilton_path_between


@dataclass
class TreeSpec:
    """Tree T on 0..n-1 with a designated bare path ``bare`` = v_0 ... v_t."""

    T: Graph
    Delta: int
    bare: list[int]

    @property
    def n(self) -> int:
        return self.T.n

    @property
    def t(self) -> int:
        return len(self.bare) - 1

    @property
    def interior(self) -> list[int]:
        return self.bare[1:-1]

    def tprime(self) -> tuple[list[int], list[tuple[int, int]]]:
        """Vertices and edges of T': interior bare vertices removed, v_0 v_t added."""
        inner = set(self.interior)
        verts = [v for v in range(self.n) if v not in inner]
        edges = [(u, v) for u, v in self.T.edges() if u not in inner and v not in inner]
        v0, vt = self.bare[0], self.bare[-1]
        if self.t > 1:
            edges.append((min(v0, vt), max(v0, vt)))
        return verts, edges

    def validate(self) -> None:
        T = self.T
        if T.m != T.n - 1 or len(T.components()) != 1:
            raise ParameterError("T is not a tree")
        if T.n and int(T.degrees.max()) > self.Delta:
            raise ParameterError(f"max degree {int(T.degrees.max())} exceeds Delta = {self.Delta}")
        b = self.bare
        if len(set(b)) != len(b) or len(b) < 2:
            raise ParameterError("bare path must have at least two distinct vertices")
        if not all(T.has_edge(u, v) for u, v in zip(b, b[1:])):
            raise ParameterError("bare path is not a path of T")
        if any(T.degree(v) != 2 for v in self.interior):
            raise ParameterError("interior bare vertices must have degree two")
        verts, _ = self.tprime()
        if len(verts) != self.n - self.t + 1:
            raise ParameterError("T' has the wrong order")

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "Delta": self.Delta, "bare": self.bare,
                           "edges": self.T.edges()})


def _random_capped_tree(k: int, Delta: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Random recursive tree on 0..k-1 where each new vertex attaches to an earlier
    vertex of degree < Delta."""
    deg = [0] * k
    edges = []
    for i in range(1, k):
        open_ = [j for j in range(i) if deg[j] < Delta]
        j = open_[int(rng.integers(len(open_)))]
        edges.append((j, i))
        deg[i] += 1
        deg[j] += 1
    return edges


def random_tree_with_bare_path(n: int, Delta: int, alpha: float, seed=0) -> TreeSpec:
    """Random T' on n - t + 1 vertices (t = ceil(alpha n)) with one edge
    subdivided into a bare path of length t, then randomly relabelled."""
    if Delta < 2:
        raise ParameterError("Delta must be at least 2")
    if not alpha > 0:
        raise ParameterError("alpha must be positive")
    t = math.ceil(alpha * n - 1e-9)
    if t > n - 1 or n < 2:
        raise ParameterError(f"bare path of length {t} does not fit in {n} vertices")
    t = max(t, 1)
    rng = make_rng(seed)
    k = n - t + 1
    base = _random_capped_tree(k, Delta, rng)
    v0, vt = base[int(rng.integers(len(base)))]
    edges = [e for e in base if e != (v0, vt)]
    path = [v0] + list(range(k, n)) + [vt]
    edges += list(zip(path, path[1:]))
    perm = rng.permutation(n)
    T = Graph(n, [(int(perm[u]), int(perm[v])) for u, v in edges])
    spec = TreeSpec(T, Delta, [int(perm[v]) for v in path])
    spec.validate()
    return spec


@dataclass
class TreeEmbedding:
    mapping: list[int]  # tree vertex -> host vertex
    x: int
    y: int
    absorbed: list[tuple[int, int]] = field(default_factory=list)

    def validate(self, G: Graph, spec: TreeSpec) -> bool:
        return is_tree_embedding(G, spec.T, self.mapping)


@dataclass
class EmbedResult:
    embedding: TreeEmbedding | None
    failure: dict | None = None

    @property
    def success(self) -> bool:
        return self.embedding is not None

    def failure_json(self) -> str:
        return json.dumps(self.failure, sort_keys=True)


def is_tree_embedding(G: Graph, T: Graph, mapping) -> bool:
    """Bijection V(T) -> V(G) carrying every tree edge onto a host edge."""
    mapping = list(mapping)
    if len(mapping) != T.n or T.n != G.n or sorted(mapping) != list(range(G.n)):
        return False
    return all(G.has_edge(mapping[u], mapping[v]) for u, v in T.edges())


def _embed_tprime(G: Graph, spec: TreeSpec, avail: set[int], rng) -> tuple[dict, dict | None]:
    """Embed T' onto exactly the vertices ``avail``; the edge v_0 v_t may map to a non-edge."""
    verts, edges = spec.tprime()
    v0, vt = spec.bare[0], spec.bare[-1]
    fake = (min(v0, vt), max(v0, vt))
    adj: dict[int, list[int]] = {v: [] for v in verts}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    parent = {v0: None}
    order = [v0]
    stack = [v0]
    while stack:
        u = stack.pop()
        for w in sorted(adj[u], key=lambda w: -len(adj[w])):
            if w not in parent:
                parent[w] = u
                order.append(w)
                stack.append(w)
    children = {v: [w for w in adj[v] if parent.get(w) == v] for v in verts}
    leaves = [v for v in order if v != v0 and not children[v]]
    inner = [v for v in order if v == v0 or children[v]]
    Gadj = G.adj
    free = set(avail)
    img: dict[int, int] = {}

    def free_deg(h):
        return len(Gadj[h] & free)

    for w in inner:
        p = parent[w]
        if p is None:
            cands = sorted(free)
        elif (min(p, w), max(p, w)) == fake:
            cands = sorted(free)
        else:
            cands = sorted(Gadj[img[p]] & free)
        need = len(children[w])
        cands = [h for h in cands if free_deg(h) >= need]
        if not cands:
            return img, {"stage": "embed", "vertex": w, "reason": "no image with enough free neighbours"}
        scores = np.array([free_deg(h) for h in cands], dtype=float)
        best = np.flatnonzero(scores == scores.max())
        h = cands[int(best[int(rng.integers(len(best)))])]
        img[w] = h
        free.discard(h)
    # leaves by bipartite matching onto what is left
    B = nx.Graph()
    left = [("t", v) for v in leaves]
    B.add_nodes_from(left, bipartite=0)
    B.add_nodes_from((("g", h) for h in free), bipartite=1)
    for v in leaves:
        p = parent[v]
        opts = free if (min(p, v), max(p, v)) == fake else (Gadj[img[p]] & free)
        B.add_edges_from((("t", v), ("g", h)) for h in opts)
    M = nx.bipartite.hopcroft_karp_matching(B, top_nodes=left) if left else {}
    if len(leaves) != len(free) or any(("t", v) not in M for v in leaves):
        return img, {"stage": "embed", "reason": "leaves cannot be matched onto the free vertices",
                     "leaves": len(leaves), "free": len(free)}
    for v in leaves:
        img[v] = M[("t", v)][1]
    return img, None


def embed_tree(G: Graph, spec: TreeSpec, reservoir_fraction: float = 0.3, seed=0,
               steps: int | None = None) -> EmbedResult:
    """Embed the spanning tree ``spec.T`` into G; failures name the stage."""
    spec.validate()
    if spec.n != G.n:
        raise ParameterError("tree and host must have the same number of vertices")
    if not 0.0 <= reservoir_fraction < 1.0:
        raise ParameterError("reservoir_fraction must lie in [0, 1)")
    rng = make_rng(seed)
    n, t = G.n, spec.t
    V0 = set(rng.choice(n, size=t - 1, replace=False).tolist()) if t > 1 else set()
    avail = set(range(n)) - V0
    img, fail = _embed_tprime(G, spec, avail, rng)
    if fail is not None:
        return EmbedResult(None, fail)
    x, y = img[spec.bare[0]], img[spec.bare[-1]]
    Vp = sorted(V0 | {x, y})
    H, labels = G.induced(Vp)
    pos = {v: i for i, v in enumerate(labels)}
    to_res = rng.random(H.m) < reservoir_fraction
    D = H.edge_subgraph(~to_res)
    R = H.edge_subgraph(to_res)
    res = hamilton_path_between(D, pos[x], pos[y], reservoir=R,
                                seed=int(rng.integers(2**31)), steps=steps)
    if not res.success:
        return EmbedResult(None, {"stage": "connect", "report": res.failure})
    path = [labels[v] for v in res.path]
    for tv, gv in zip(spec.bare, path):
        img[tv] = gv
    mapping = [img[v] for v in range(n)]
    emb = TreeEmbedding(mapping, x, y, [(labels[a], labels[b]) for a, b in res.absorbed])
    if not emb.validate(G, spec):
        return EmbedResult(None, {"stage": "validate", "mapping": mapping})
    return EmbedResult(emb)


@dataclass
class TreeUniversal(Property):
    """Holds when every listed tree embeds; a sampled stand-in for universality."""

    specs: list = field(default_factory=list)
    reservoir_fraction: float = 0.3

    def __post_init__(self):
        self.name = "tree-universal"
        self.need_degree = 1

    def check(self, G, seed=0):
        for i, spec in enumerate(self.specs):
            r = embed_tree(G, spec, self.reservoir_fraction, seed=seed + i)
            if not r.success:
                return CheckResult("unknown", i, f"tree {i} not embedded: {r.failure.get('stage')}",
                                   exact=False)
        return CheckResult(YES, None, f"{len(self.specs)} trees embedded", exact=False)
