"""Property checkers returning YES / NO / UNKNOWN with a checkable witness.

Exact checkers exist for connectivity, perfect matchings and minimum degree.
Hamiltonicity and pancyclicity are exact up to ``EXACT_HAM_MAX_N`` vertices;
above that a rotation-extension search can only confirm, and simple
certificates (a vertex of degree < 2, a cut vertex, a disconnection) can only
refute.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Any

import networkx as nx
import numpy as np

from .errors import ParameterError
from .graph import Graph
from .posa import hamilton_cycle_heuristic

YES = "yes"
NO = "no"
UNKNOWN = "unknown"

EXACT_HAM_MAX_N = 20


@dataclass
class CheckResult:
    status: str
    witness: Any = None
    reason: str = ""
    exact: bool = True

    @property
    def holds(self) -> bool:
        return self.status == YES

    def __bool__(self) -> bool:
        return self.holds

    def to_dict(self) -> dict:
        w = self.witness
        if isinstance(w, np.ndarray):
            w = w.tolist()
        elif isinstance(w, (set, frozenset)):
            w = sorted(w)
        return {"status": self.status, "witness": w, "reason": self.reason, "exact": self.exact}


# -- witness validators -----------------------------------------------------------

def is_spanning_tree(G: Graph, edges) -> bool:
    edges = [tuple(sorted(e)) for e in edges]
    if len(edges) != max(G.n - 1, 0) or not all(G.has_edge(*e) for e in edges):
        return False
    return len(Graph(G.n, edges).components()) == (1 if G.n else 0)


def is_matching(G: Graph, edges, perfect: bool = False) -> bool:
    seen = set()
    for u, v in edges:
        if not G.has_edge(u, v) or u in seen or v in seen:
            return False
        seen.update((u, v))
    return len(seen) >= G.n - 1 if perfect else True


def is_cycle(G: Graph, seq, length: int | None = None) -> bool:
    seq = list(seq)
    if len(seq) < 3 or len(set(seq)) != len(seq):
        return False
    if length is not None and len(seq) != length:
        return False
    return all(G.has_edge(a, b) for a, b in zip(seq, seq[1:] + seq[:1]))


def is_hamilton_cycle(G: Graph, seq) -> bool:
    return is_cycle(G, seq, G.n) and set(seq) == set(range(G.n))


def components_without(G: Graph, X) -> int:
    X = set(X)
    rest = [v for v in range(G.n) if v not in X]
    if not rest:
        return 0
    H, _ = G.induced(rest)
    return len(H.components())


def validate_toughness_certificate(G: Graph, X) -> bool:
    """c(G - X) > |X| rules out a Hamilton cycle (for n >= 3)."""
    return G.n >= 3 and components_without(G, X) > len(set(X))


# -- connectivity -----------------------------------------------------------------

def check_connectivity(G: Graph) -> CheckResult:
    if G.n <= 1:
        return CheckResult(YES, [], "trivial")
    adj = G.adj
    parent = {0: None}
    tree = []
    q = deque([0])
    while q:
        u = q.popleft()
        for w in sorted(adj[u]):
            if w not in parent:
                parent[w] = u
                tree.append((min(u, w), max(u, w)))
                q.append(w)
    if len(parent) == G.n:
        return CheckResult(YES, tree, "spanning tree")
    return CheckResult(NO, sorted(parent), "component missing some vertex")


# -- matchings -------------------------------------------------------------------

def check_perfect_matching(G: Graph) -> CheckResult:
    """floor(n/2) independent edges; for odd n one vertex stays uncovered."""
    H = nx.Graph()
    H.add_nodes_from(range(G.n))
    H.add_edges_from(G.edges())
    M = nx.max_weight_matching(H, maxcardinality=True)
    M = sorted(tuple(sorted(e)) for e in M)
    if len(M) == G.n // 2:
        return CheckResult(YES, M, "perfect matching" if G.n % 2 == 0 else "matching missing one vertex")
    return CheckResult(NO, M, f"maximum matching has {len(M)} edges")


# -- min degree ------------------------------------------------------------------

def check_min_degree(G: Graph, k: int) -> CheckResult:
    if G.n == 0:
        return CheckResult(YES, None, "empty graph")
    deg = G.degrees
    v = int(np.argmin(deg))
    if deg[v] >= k:
        return CheckResult(YES, int(deg[v]), f"minimum degree {int(deg[v])}")
    return CheckResult(NO, v, f"vertex {v} has degree {int(deg[v])}")


# -- hamiltonicity ---------------------------------------------------------------

def _exact_hamilton_cycle(G: Graph) -> list[int] | None:
    from ._kernels import paths_from

    n = G.n
    bits = np.array(G.adj_bits, dtype=np.int64)
    dp = paths_from(bits, n, 0)
    full = (1 << n) - 1
    ends = int(dp[full]) & int(bits[0])
    if not ends:
        return None
    t = (ends & -ends).bit_length() - 1
    out = [t]
    mask = full
    while t != 0:
        pm = mask ^ (1 << t)
        cand = int(dp[pm]) & int(bits[t])
        u = (cand & -cand).bit_length() - 1
        out.append(u)
        mask, t = pm, u
    return out[::-1]


def _articulation_point(G: Graph) -> int | None:
    H = nx.Graph()
    H.add_nodes_from(range(G.n))
    H.add_edges_from(G.edges())
    pts = sorted(nx.articulation_points(H))
    return pts[0] if pts else None


def non_hamilton_certificate(G: Graph) -> tuple[list[int], str] | None:
    """A set X with c(G - X) > |X| found by cheap tests, or None."""
    n = G.n
    if n < 3:
        return None
    deg = G.degrees
    v = int(np.argmin(deg))
    if deg[v] == 0:
        return [], f"vertex {v} is isolated"
    if deg[v] == 1:
        return [int(G.neighbors(v)[0])], f"vertex {v} has degree 1"
    if len(G.components()) > 1:
        return [], "disconnected"
    a = _articulation_point(G)
    if a is not None:
        return [a], f"cut vertex {a}"
    return None


def check_hamiltonicity(G: Graph, mode: str = "auto", seed: int = 0) -> CheckResult:
    """mode: 'exact', 'heuristic' or 'auto' (exact when n <= EXACT_HAM_MAX_N)."""
    n = G.n
    if mode not in ("auto", "exact", "heuristic"):
        raise ParameterError(f"unknown mode {mode!r}")
    if mode == "exact" and n > EXACT_HAM_MAX_N:
        raise ParameterError(f"exact Hamiltonicity is limited to n <= {EXACT_HAM_MAX_N}")
    if n < 3:
        return CheckResult(NO, None, "fewer than 3 vertices")
    cert = non_hamilton_certificate(G)
    if cert is not None:
        return CheckResult(NO, cert[0], cert[1])
    exact = mode == "exact" or (mode == "auto" and n <= EXACT_HAM_MAX_N)
    if exact:
        cyc = _exact_hamilton_cycle(G)
        if cyc is None:
            return CheckResult(NO, None, "exhaustive search")
        return CheckResult(YES, cyc, "Hamilton cycle")
    cyc = hamilton_cycle_heuristic(G, seed=seed)
    if cyc is not None:
        return CheckResult(YES, cyc, "Hamilton cycle", exact=False)
    return CheckResult(UNKNOWN, None, "rotation search found no Hamilton cycle", exact=False)


# -- pancyclicity ----------------------------------------------------------------

def _cycle_from_dp(G: Graph, s: int, mask: int, t: int) -> list[int]:
    from ._kernels import paths_from_restricted

    bits = np.array(G.adj_bits, dtype=np.int64)
    dp = paths_from_restricted(bits, G.n, s, np.int64(mask))
    out = [t]
    cur = mask
    while t != s:
        pm = cur ^ (1 << t)
        cand = int(dp[pm]) & int(bits[t])
        u = (cand & -cand).bit_length() - 1
        out.append(u)
        cur, t = pm, u
    return out[::-1]


def _short_cycle(G: Graph, length: int, rng: np.random.Generator, tries: int = 50):
    """Budgeted DFS for a cycle of a short given length, least vertex first."""
    adj = [sorted(a) for a in G.adj]
    n = G.n
    budget = [20000]

    def dfs(path, on):
        if budget[0] <= 0:
            return None
        budget[0] -= 1
        if len(path) == length:
            return list(path) if path[0] in G.adj[path[-1]] else None
        for w in adj[path[-1]]:
            if w > path[0] and w not in on:
                path.append(w)
                on.add(w)
                r = dfs(path, on)
                if r:
                    return r
                on.discard(w)
                path.pop()
        return None

    starts = rng.permutation(n)[:tries]
    for s in starts:
        budget[0] = 20000
        r = dfs([int(s)], {int(s)})
        if r:
            return r
    return None


def check_pancyclicity(G: Graph, mode: str = "auto", seed: int = 0) -> CheckResult:
    """Cycles of every length 3..n; the witness maps length to a cycle."""
    n = G.n
    if mode not in ("auto", "exact", "heuristic"):
        raise ParameterError(f"unknown mode {mode!r}")
    if mode == "exact" and n > EXACT_HAM_MAX_N:
        raise ParameterError(f"exact pancyclicity is limited to n <= {EXACT_HAM_MAX_N}")
    if n < 3:
        return CheckResult(NO, None, "fewer than 3 vertices")
    exact = mode == "exact" or (mode == "auto" and n <= EXACT_HAM_MAX_N)
    if exact:
        from ._kernels import cycle_lengths

        found = cycle_lengths(np.array(G.adj_bits, dtype=np.int64), n)
        wit = {}
        for l in range(3, n + 1):
            if found[l, 0] < 0:
                return CheckResult(NO, l, f"no cycle of length {l}")
            wit[l] = _cycle_from_dp(G, int(found[l, 0]), int(found[l, 1]), int(found[l, 2]))
        return CheckResult(YES, wit, "cycles of all lengths")
    ham = check_hamiltonicity(G, "heuristic", seed)
    if ham.status == NO:
        return CheckResult(NO, n, "no Hamilton cycle: " + ham.reason, exact=True)
    rng = np.random.default_rng(seed)
    wit = {}
    missing = []
    if ham.holds:
        wit[n] = ham.witness
    for l in range(3, n):
        c = _short_cycle(G, l, rng) if l <= 8 else None
        if c is None and ham.holds:
            c = _cycle_by_chords(G, ham.witness, l)
            if c is None:
                c = _cycle_on_arc(G, ham.witness, l, seed)
        if c is None:
            missing.append(l)
        else:
            wit[l] = c
    if ham.holds and not missing:
        return CheckResult(YES, wit, "cycles of all lengths", exact=False)
    return CheckResult(UNKNOWN, wit, f"no cycle found for lengths {missing[:10]}", exact=False)


def _cycle_by_chords(G: Graph, ham, length: int):
    """A cycle of the given length made of one chord plus an arc of ``ham``."""
    n = len(ham)
    for i in range(n):
        j = (i + length - 1) % n
        if G.has_edge(ham[i], ham[j]):
            return [ham[(i + k) % n] for k in range(length)]
    return None


def _cycle_on_arc(G: Graph, ham, length: int, seed: int, tries: int = 4):
    """Look for a Hamilton cycle of G restricted to ``length`` consecutive vertices of ``ham``."""
    n = len(ham)
    for t in range(tries):
        i = (t * n) // tries
        verts = [ham[(i + k) % n] for k in range(length)]
        H, labels = G.induced(verts)
        if H.degrees.min() < 2:
            continue
        cyc = hamilton_cycle_heuristic(H, seed=seed + t, attempts=1)
        if cyc is not None:
            return [labels[v] for v in cyc]
    return None


# -- property objects -------------------------------------------------------------

@dataclass
class Property:
    name: str = field(init=False, default="")
    need_degree: int = field(init=False, default=1)

    def check(self, G: Graph, seed: int = 0) -> CheckResult:
        raise NotImplementedError

    def holds(self, G: Graph, seed: int = 0) -> bool:
        return self.check(G, seed).holds


@dataclass
class Connectivity(Property):
    def __post_init__(self):
        self.name = "connectivity"
        self.need_degree = 1

    def check(self, G, seed=0):
        return check_connectivity(G)


@dataclass
class PerfectMatching(Property):
    def __post_init__(self):
        self.name = "perfect-matching"
        self.need_degree = 1

    def check(self, G, seed=0):
        return check_perfect_matching(G)


@dataclass
class MinDegree(Property):
    k: int = 1

    def __post_init__(self):
        if self.k < 0:
            raise ParameterError("k must be non-negative")
        self.name = f"min-degree:{self.k}"
        self.need_degree = self.k

    def check(self, G, seed=0):
        return check_min_degree(G, self.k)


@dataclass
class Hamiltonicity(Property):
    mode: str = "auto"

    def __post_init__(self):
        self.name = "hamiltonicity"
        self.need_degree = 2

    def check(self, G, seed=0):
        return check_hamiltonicity(G, self.mode, seed)


@dataclass
class Pancyclicity(Property):
    mode: str = "auto"

    def __post_init__(self):
        self.name = "pancyclicity"
        self.need_degree = 2

    def check(self, G, seed=0):
        return check_pancyclicity(G, self.mode, seed)


def property_from_id(text: str) -> Property:
    """Parse 'connectivity', 'perfect-matching', 'min-degree:k', 'hamiltonicity',
    'pancyclicity' (the last two accept ':exact' or ':heuristic')."""
    name, _, arg = text.strip().lower().partition(":")
    if name == "connectivity":
        return Connectivity()
    if name in ("perfect-matching", "matching"):
        return PerfectMatching()
    if name == "min-degree":
        return MinDegree(int(arg or 1))
    if name == "hamiltonicity":
        return Hamiltonicity(arg or "auto")
    if name == "pancyclicity":
        return Pancyclicity(arg or "auto")
    raise ParameterError(f"unknown property {text!r}")


def property_holds(G: Graph, prop: Property | str, seed: int = 0) -> CheckResult:
    if isinstance(prop, str):
        prop = property_from_id(prop)
    return prop.check(G, seed)
