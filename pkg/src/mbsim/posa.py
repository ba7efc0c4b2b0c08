"""Rotation-extension with a protected pair.

A path through the protected pair ``e`` may be rotated at its free end using a
chord ``x_j x_h`` as long as the path edge that disappears is not ``e``.  The
module provides the rotation closure, exact longest-path-through-e oracles for
small graphs, e-booster enumeration, neighbourhood-expansion certificates and
a booster-absorbing Hamilton x-y path search.
"""

from __future__ import annotations

import itertools
import json
import math
import random
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .graph import Graph

EXACT_MAX_N = 18
BOOSTER_EXACT_MAX_N = 12
PATH_EXACT_MAX_N = 20


def pair(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


def _adj_array(adj_bits) -> np.ndarray:
    return np.array(adj_bits, dtype=np.int64)


def _is_connected(adj: list[set[int]]) -> bool:
    n = len(adj)
    if n == 0:
        return True
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == n


def path_contains_pair(path, e) -> bool:
    a, b = e
    for u, v in zip(path, path[1:]):
        if (u == a and v == b) or (u == b and v == a):
            return True
    return False


def is_path_in(adj: list[set[int]], path, extra=()) -> bool:
    """Simple path whose consecutive pairs are edges of adj or pairs in ``extra``."""
    if len(set(path)) != len(path):
        return False
    extra = {pair(*p) for p in extra}
    return all(v in adj[u] or pair(u, v) in extra for u, v in zip(path, path[1:]))


# -- rotation closure -----------------------------------------------------------

@dataclass
class RotationFrontier:
    base: Graph
    protected: tuple[int, int]
    anchor: int
    reference: list[int]
    paths: dict[int, list[tuple[int, ...]]]
    exact: bool
    extensions: list[tuple[int, ...]] = field(default_factory=list)

    @property
    def R(self) -> set[int]:
        return set(self.paths)

    @property
    def Rminus(self) -> set[int]:
        pos = {v: i for i, v in enumerate(self.reference)}
        return {self.reference[pos[v] - 1] for v in self.R if pos[v] > 0}

    @property
    def Rplus(self) -> set[int]:
        pos = {v: i for i, v in enumerate(self.reference)}
        last = len(self.reference) - 1
        return {self.reference[pos[v] + 1] for v in self.R if pos[v] < last}

    def all_paths(self):
        for ps in self.paths.values():
            yield from ps

    def outside_neighbourhood(self) -> set[int]:
        adj = self.base.adj
        R = self.R
        out = set()
        for v in R:
            out |= adj[v]
        return out - R

    def endpoint_claim_holds(self) -> bool:
        """N(R) minus R lies inside R-minus, R-plus and the protected pair."""
        allowed = self.Rminus | self.Rplus | set(self.protected)
        return self.outside_neighbourhood() <= allowed

    def to_json(self) -> str:
        return json.dumps({
            "protected": list(self.protected),
            "anchor": self.anchor,
            "reference": list(self.reference),
            "R": sorted(self.R),
            "exact": self.exact,
            "paths": {str(k): [list(p) for p in v] for k, v in sorted(self.paths.items())},
        }, sort_keys=True)


def _rotations(adj, path, e):
    """Every elementary rotation of ``path`` at its last vertex that keeps e."""
    h = len(path) - 1
    end = path[h]
    pos = {v: i for i, v in enumerate(path)}
    a, b = e
    for w in sorted(adj[end]):
        j = pos.get(w)
        if j is None or j >= h - 1:
            continue
        u, v = path[j], path[j + 1]
        if (u == a and v == b) or (u == b and v == a):
            continue
        yield path[:j + 1] + path[j + 1:][::-1]


def rotate_all(D: Graph, P, e, anchor: int | None = None,
               max_paths: int = 20000) -> RotationFrontier:
    """Closure of P under elementary rotations with a fixed anchor, never removing e.

    Every distinct path is kept while at most ``max_paths`` of them appear
    (``exact=True``); past that budget the search restarts keeping one path per
    endpoint, the classical Pósa bookkeeping, and ``exact`` is False.
    """
    P = [int(v) for v in P]
    e = pair(*e)
    if not path_contains_pair(P, e):
        raise ParameterError("the path must contain the protected pair as an edge")
    if not is_path_in(D.adj, P, extra=[e]):
        raise ParameterError("P is not a simple path of D + e")
    if anchor is None:
        anchor = P[0]
    if anchor == P[-1] and anchor != P[0]:
        P = P[::-1]
    elif anchor != P[0]:
        raise ParameterError("anchor must be an endpoint of P")
    adj = D.adj
    start = tuple(P)
    seen = {start}
    queue = deque([start])
    exact = True
    extensions = []
    while queue:
        q = queue.popleft()
        if any(w not in q for w in adj[q[-1]]):
            extensions.append(q)
        for r in _rotations(adj, list(q), e):
            t = tuple(r)
            if t not in seen:
                seen.add(t)
                queue.append(t)
                if len(seen) > max_paths:
                    exact = False
                    break
        if not exact:
            break
    if exact:
        paths: dict[int, list[tuple[int, ...]]] = {}
        for q in seen:
            paths.setdefault(q[-1], []).append(q)
        for v in paths:
            paths[v].sort()
    else:
        paths, extensions = _rotate_by_endpoint(adj, start, e)
    return RotationFrontier(D, e, anchor, list(start), paths, exact, extensions)


def _rotate_by_endpoint(adj, start, e):
    paths = {start[-1]: [start]}
    queue = deque([start])
    extensions = []
    while queue:
        q = queue.popleft()
        if any(w not in q for w in adj[q[-1]]):
            extensions.append(q)
        for r in _rotations(adj, list(q), e):
            if r[-1] not in paths:
                t = tuple(r)
                paths[r[-1]] = [t]
                queue.append(t)
    return paths, extensions


# -- exact oracles (small n) ------------------------------------------------------

def _bits_with(D: Graph, extra=()) -> np.ndarray:
    bits = list(D.adj_bits)
    for u, v in extra:
        bits[u] |= 1 << v
        bits[v] |= 1 << u
    return _adj_array(bits)


def _gate(n: int, limit: int = EXACT_MAX_N) -> None:
    if n > limit:
        raise ParameterError(f"exact path search is limited to n <= {limit}, got {n}")


def longest_through_length(D: Graph, e, extra=()) -> tuple[int, bool]:
    """(vertex count of a longest path of D + e + extra using e, Hamilton cycle through e?)."""
    from ._kernels import longest_through_pair

    _gate(D.n)
    x, y = pair(*e)
    best, ham = longest_through_pair(_bits_with(D, extra), D.n, x, y)
    return int(best), bool(ham)


def _reconstruct(bits: np.ndarray, n: int, src: int, mask: int) -> list[int]:
    from ._kernels import paths_from_restricted

    dp = paths_from_restricted(bits, n, src, np.int64(mask))
    if dp[mask] == 0:
        raise ParameterError("no path covers the requested mask")
    ends = int(dp[mask])
    t = (ends & -ends).bit_length() - 1
    out = [t]
    cur = mask
    while t != src:
        prev_mask = cur ^ (1 << t)
        cand = int(dp[prev_mask]) & int(bits[t])
        u = (cand & -cand).bit_length() - 1
        out.append(u)
        cur, t = prev_mask, u
    return out[::-1]


def longest_path_through(D: Graph, e, extra=()) -> list[int]:
    """An explicit longest path of D + e + extra that uses the pair e."""
    from ._kernels import longest_path_through_pair_witness

    _gate(D.n, 14)
    x, y = pair(*e)
    bits = _bits_with(D, extra)
    best, a, b = longest_path_through_pair_witness(bits, D.n, x, y)
    left = _reconstruct(bits, D.n, x, int(a))[::-1]
    right = _reconstruct(bits, D.n, y, int(b))
    return left + right


def hamilton_cycle_through(D: Graph, e) -> bool:
    return longest_through_length(D, e)[1]


# -- e-boosters -----------------------------------------------------------------

@dataclass
class BoosterReport:
    boosters: set[tuple[int, int]]
    exact: bool
    status: str  # "ok" or "already-hamiltonian"
    longest: int | None = None

    @property
    def count(self) -> int:
        return len(self.boosters)


def find_e_boosters(D: Graph, e, exact: bool | None = None, seed: int = 0) -> BoosterReport:
    """e-boosters of D: non-edges whose addition lengthens the longest path
    through e or closes a Hamilton cycle through e.

    Exact for n <= 12 by default.  Above that, the set comes from two levels of
    rotations around a long path through e and is only a lower-bound set.
    """
    e = pair(*e)
    if e[0] == e[1]:
        raise ParameterError("e must be a pair of distinct vertices")
    if not _is_connected(D.adj):
        raise ParameterError("D must be connected")
    if exact is None:
        exact = D.n <= BOOSTER_EXACT_MAX_N
    if exact:
        L, ham = longest_through_length(D, e)
        if ham:
            return BoosterReport(set(), True, "already-hamiltonian", L)
        out = set()
        for u, v in itertools.combinations(range(D.n), 2):
            if D.has_edge(u, v) or (u, v) == e:
                continue
            L2, ham2 = longest_through_length(D, e, extra=[(u, v)])
            if ham2 or L2 > L:
                out.add((u, v))
        return BoosterReport(out, True, "ok", L)
    rng = random.Random(seed)
    found = _posa_search(D.adj, D.n, e, [e[0], e[1]], rng, 40 * D.n * D.n)
    if found.cycle is not None:
        return BoosterReport(set(), False, "already-hamiltonian", D.n)
    P = found.best
    out = set()
    for anchor_first in (P, P[::-1]):
        fr = rotate_all(D, anchor_first, e, max_paths=0)
        for v in fr.R:
            if v != fr.anchor and not D.has_edge(fr.anchor, v) and pair(fr.anchor, v) != e:
                out.add(pair(fr.anchor, v))
        for v, paths in fr.paths.items():
            q = list(paths[0])[::-1]
            fr2 = rotate_all(D, q, e, max_paths=0)
            for z in fr2.R:
                if z != v and not D.has_edge(v, z) and pair(v, z) != e:
                    out.add(pair(v, z))
    return BoosterReport(out, False, "ok", len(P))


# -- expansion ------------------------------------------------------------------

@dataclass
class ExpansionCert:
    k: int
    verified: bool
    status: str  # "verified", "violated" or "inconclusive"
    witness: tuple[int, ...] | None = None
    checked: int = 0


def expansion_deficit_set(D: Graph, X) -> bool:
    """True if X violates |N(X) minus X| >= 2|X| + 2."""
    bits = D.adj_bits
    nb = 0
    xm = 0
    for v in X:
        nb |= bits[v]
        xm |= 1 << v
    return bin(nb & ~xm).count("1") < 2 * len(X) + 2


def check_expansion(D: Graph, k: int, budget: int = 2_000_000, samples: int = 20000,
                    seed: int = 0) -> ExpansionCert:
    """Check |N(X) minus X| >= 2|X|+2 for every non-empty X with |X| <= k.

    Exhaustive when the number of sets is within ``budget``.  Otherwise a
    randomized search may refute the property but never verifies it.
    """
    if k < 0:
        raise ParameterError("k must be non-negative")
    n = D.n
    k = min(k, n)
    total = sum(math.comb(n, s) for s in range(1, k + 1))
    bits = D.adj_bits
    if total <= budget:
        checked = 0
        for s in range(1, k + 1):
            need = 2 * s + 2
            for X in itertools.combinations(range(n), s):
                checked += 1
                nb = 0
                xm = 0
                for v in X:
                    nb |= bits[v]
                    xm |= 1 << v
                if bin(nb & ~xm).count("1") < need:
                    return ExpansionCert(k, False, "violated", X, checked)
        return ExpansionCert(k, True, "verified", None, checked)
    rng = random.Random(seed)
    order = sorted(range(n), key=lambda v: D.degree(v))
    checked = 0
    # low-degree vertices and their neighbourhoods are the usual culprits
    for s in range(1, k + 1):
        X = tuple(order[:s])
        checked += 1
        if expansion_deficit_set(D, X):
            return ExpansionCert(k, False, "violated", X, checked)
    for _ in range(samples):
        s = rng.randint(1, k)
        v = rng.randrange(n)
        ball = [v] + sorted(D.adj[v])
        rng.shuffle(ball)
        X = tuple(sorted(set(ball[:s]) | set(rng.sample(range(n), max(0, s - len(ball))))))[:s]
        checked += 1
        if X and expansion_deficit_set(D, X):
            return ExpansionCert(k, False, "violated", X, checked)
    return ExpansionCert(k, False, "inconclusive", None, checked)


# -- randomized rotation-extension ---------------------------------------------

@dataclass
class _SearchOutcome:
    best: list[int]
    cycle: list[int] | None


def _cycle_extend(adj, P, e, on_path):
    """P closes into a cycle through e; reopen it next to a vertex with an
    outside neighbour and step out.  Returns the longer path or None."""
    n_path = len(P)
    for i, c in enumerate(P):
        outside = [z for z in adj[c] if not on_path[z]]
        if not outside:
            continue
        z = min(outside)
        rot = P[i:] + P[:i]  # starts at c
        # option A drops (c, rot[1]); option B drops (rot[-1], c)
        if pair(c, rot[1]) != e:
            newp = rot[1:] + [c, z]
        elif n_path >= 3 and pair(rot[-1], c) != e:
            newp = rot[:0:-1] + [c, z]
        else:
            continue
        return newp
    return None


def _posa_search(adj, n, e, start, rng: random.Random, max_steps: int) -> _SearchOutcome:
    """Randomized rotation-extension for a Hamilton cycle through the pair e.

    ``adj`` are neighbour sets of the real edges; e may be a non-edge.  Returns
    the longest path through e seen, and a Hamilton cycle through e if found.
    """
    e = pair(*e)
    nbrs = [sorted(a) for a in adj]
    P = list(start)
    on_path = [False] * n
    for v in P:
        on_path[v] = True
    pos = {v: i for i, v in enumerate(P)}
    best = list(P)
    stale = 0
    a, b = e
    for _ in range(max_steps):
        h = P[-1]
        if len(P) == n and P[0] in adj[h] and n >= 3:
            return _SearchOutcome(list(P), list(P))
        opts = nbrs[h]
        if not opts:
            P.reverse()
            pos = {v: i for i, v in enumerate(P)}
            stale += 1
            if not nbrs[P[-1]]:
                break
            continue
        w = opts[rng.randrange(len(opts))]
        if not on_path[w]:
            P.append(w)
            on_path[w] = True
            pos[w] = len(P) - 1
            if len(P) > len(best):
                best = list(P)
                stale = 0
            continue
        j = pos[w]
        if j == 0 and len(P) < n and len(P) >= 3:
            ext = _cycle_extend(adj, P, e, on_path)
            if ext is not None:
                P = ext
                on_path[P[-1]] = True
                pos = {v: i for i, v in enumerate(P)}
                if len(P) > len(best):
                    best = list(P)
                    stale = 0
                continue
        if j >= len(P) - 2:
            stale += 1
        else:
            u, v = P[j], P[j + 1]
            if (u == a and v == b) or (u == b and v == a):
                stale += 1
            else:
                tail = P[j + 1:][::-1]
                P[j + 1:] = tail
                for i in range(j + 1, len(P)):
                    pos[P[i]] = i
                stale += 1
        if stale > 4 * n:
            P.reverse()
            pos = {v: i for i, v in enumerate(P)}
            stale = 0
    return _SearchOutcome(best, None)



def _frontier_candidates(fr: RotationFrontier, pool, on_path):
    """Reservoir boosters seen from one rotation frontier.

    A pair (anchor, v) with v in R closes a cycle through e; a pair (v, z)
    with z off the path lengthens it.
    """
    out = []
    for v, paths in fr.paths.items():
        Q = list(paths[0])
        if v != fr.anchor and pair(fr.anchor, v) in pool:
            out.append((pair(fr.anchor, v), Q, "close", fr))
        for p in pool:
            if v in p:
                z = p[0] + p[1] - v
                if not on_path[z]:
                    out.append((p, Q, "extend", fr))
    return out


def _pick_booster(cur: Graph, P, e, pool):
    """Lexicographically least reservoir booster reachable by one or two rotation levels."""
    on_path = [False] * cur.n
    for w in P:
        on_path[w] = True
    cands = []
    frontiers = [rotate_all(cur, Q, e, max_paths=0) for Q in (P, P[::-1])]
    for fr in frontiers:
        cands += _frontier_candidates(fr, pool, on_path)
    if not cands:
        for fr in frontiers:
            for v, paths in sorted(fr.paths.items()):
                fr2 = rotate_all(cur, list(paths[0])[::-1], e, max_paths=0)
                cands += _frontier_candidates(fr2, pool, on_path)
    if not cands:
        return None
    return min(cands, key=lambda c: (c[0], c[2]))


def _cycle_to_xy_path(cycle, x, y) -> list[int]:
    """Hamilton cycle containing consecutive x, y -> the x..y path avoiding xy."""
    n = len(cycle)
    i = cycle.index(x)
    if cycle[(i + 1) % n] == y:
        # walk backwards from x
        return [cycle[(i - k) % n] for k in range(n)]
    return [cycle[(i + k) % n] for k in range(n)]


@dataclass
class HamPathResult:
    path: list[int] | None
    absorbed: list[tuple[int, int]]
    rounds: int
    failure: dict | None = None

    @property
    def success(self) -> bool:
        return self.path is not None

    def failure_json(self) -> str:
        return json.dumps(self.failure, sort_keys=True)


def validate_xy_path(D: Graph, path, x, y, extra=()) -> bool:
    return (path is not None and len(path) == D.n and path[0] == x and path[-1] == y
            and set(path) == set(range(D.n)) and is_path_in(D.adj, path, extra))


def _exact_xy_path(bits: np.ndarray, n: int, x: int, y: int) -> list[int] | None:
    from ._kernels import paths_from

    dp = paths_from(bits, n, x)
    full = (1 << n) - 1
    if not int(dp[full]) >> y & 1:
        return None
    out = [y]
    mask, t = full, y
    while t != x:
        pm = mask ^ (1 << t)
        cand = int(dp[pm]) & int(bits[t])
        u = (cand & -cand).bit_length() - 1
        out.append(u)
        mask, t = pm, u
    return out[::-1]


def _ham_path_exact(D: Graph, x: int, y: int, pool, max_rounds: int) -> HamPathResult:
    """Absorption loop with exact existence tests and exact booster checks."""
    from ._kernels import longest_through_pair

    n = D.n
    bits = list(D.adj_bits)
    absorbed: list[tuple[int, int]] = []
    pool = sorted(pool)
    L = None
    for rounds in range(max_rounds + 1):
        arr = _adj_array(bits)
        path = _exact_xy_path(arr, n, x, y)
        if path is not None:
            return HamPathResult(path, absorbed, rounds)
        if rounds == max_rounds or not pool:
            break
        L, _ = longest_through_pair(arr, n, x, y)
        choice = None
        for u, v in pool:
            trial = arr.copy()
            trial[u] |= 1 << v
            trial[v] |= 1 << u
            L2, ham2 = longest_through_pair(trial, n, x, y)
            if ham2 or L2 > L:
                choice = (u, v)
                break
        if choice is None:
            break
        pool.remove(choice)
        absorbed.append(choice)
        u, v = choice
        bits[u] |= 1 << v
        bits[v] |= 1 << u
    if L is None:
        L, _ = longest_through_pair(_adj_array(bits), n, x, y)
    failure = {"stage": "absorption", "exact": True, "longest": int(L),
               "absorbed": [list(b) for b in absorbed], "reservoir_left": len(pool)}
    return HamPathResult(None, absorbed, len(absorbed), failure)


def hamilton_path_between(D: Graph, x: int, y: int, reservoir: Graph | None = None,
                          seed: int = 0, steps: int | None = None,
                          max_rounds: int | None = None,
                          exact: bool | None = None) -> HamPathResult:
    """Hamilton x-y path of D, absorbing e-boosters from ``reservoir`` as needed.

    The pair xy is treated as a (possibly fake) edge; a Hamilton cycle through
    it minus the pair is the answer.  While none exists, the lexicographically
    least reservoir pair that is an e-booster is added.  At most |V(D)|
    boosters are absorbed.

    With ``exact`` (default for n <= PATH_EXACT_MAX_N) existence and booster
    status are decided by dynamic programming.  Otherwise a randomized
    rotation-extension search runs and boosters are drawn from one or two
    levels of rotations around its best path.
    """
    n = D.n
    if x == y:
        raise ParameterError("x and y must differ")
    if not (0 <= x < n and 0 <= y < n):
        raise ParameterError("x and y must be vertices of D")
    e = pair(x, y)
    rng = random.Random(seed)
    if steps is None:
        steps = 30 * n * n + 1000
    if max_rounds is None:
        max_rounds = n
    adj = [set(a) for a in D.adj]
    pool = set()
    if reservoir is not None:
        pool = {p for p in reservoir.edges() if not D.has_edge(*p) and p != e}
    if exact is None:
        exact = n <= PATH_EXACT_MAX_N
    if exact:
        if n > PATH_EXACT_MAX_N:
            raise ParameterError(f"exact mode is limited to n <= {PATH_EXACT_MAX_N}")
        return _ham_path_exact(D, x, y, pool, max_rounds)
    absorbed: list[tuple[int, int]] = []
    P = [x, y]
    for rounds in range(max_rounds + 1):
        out = _posa_search(adj, n, e, P, rng, steps)
        if out.cycle is not None:
            path = _cycle_to_xy_path(out.cycle, x, y)
            return HamPathResult(path, absorbed, rounds)
        P = out.best
        if not pool or rounds == max_rounds:
            break
        cur = Graph(n, sorted({pair(u, v) for u in range(n) for v in adj[u]}))
        choice = _pick_booster(cur, P, e, pool)
        if choice is None:
            break
        booster, Q, kind, _ = choice
        pool.discard(booster)
        absorbed.append(booster)
        u, v = booster
        adj[u].add(v)
        adj[v].add(u)
        if kind == "extend":
            z = u if v == Q[-1] else v
            P = Q + [z]
            continue
        if len(Q) == n:
            return HamPathResult(_cycle_to_xy_path(Q, x, y), absorbed, rounds + 1)
        on_path = [False] * n
        for w in Q:
            on_path[w] = True
        ext = _cycle_extend(adj, Q, e, on_path)
        P = ext if ext is not None else Q
    cur = Graph(n, sorted({pair(u, v) for u in range(n) for v in adj[u]}))
    frontier = rotate_all(cur, P, e, max_paths=2000)
    failure = {
        "stage": "absorption",
        "best_path": P,
        "absorbed": [list(b) for b in absorbed],
        "frontier": json.loads(frontier.to_json()),
    }
    return HamPathResult(None, absorbed, len(absorbed), failure)


def hamilton_cycle_heuristic(G: Graph, seed: int = 0, attempts: int = 4,
                             steps: int | None = None) -> list[int] | None:
    """Try to find a Hamilton cycle; None means not found (not a proof)."""
    n = G.n
    if n < 3 or G.m == 0:
        return None
    deg = G.degrees
    v = int(np.argmin(deg))
    nb = sorted(G.adj[v])
    if not nb:
        return None
    for t in range(attempts):
        u = nb[t % len(nb)]
        res = hamilton_path_between(G, v, u, None, seed=seed * 7919 + t, steps=steps)
        if res.success:
            cyc = res.path
            if all(G.has_edge(a, b) for a, b in zip(cyc, cyc[1:] + cyc[:1])):
                return cyc
    return None
