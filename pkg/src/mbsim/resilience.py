"""Local and global resilience: adversarial edge deletion against a property.

A deletion plan H respects a local budget r when d_H(v) <= floor(r d_G(v)) at
every vertex, so the least r at which some H destroys P equals the least
achievable value of max_v d_H(v)/d_G(v).  Heuristic attacks only give upper
bounds; small graphs (n <= 8 by default) are solved exactly by enumerating the
witness structures of P and solving a hitting-set MILP.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from .checkers import (NO, Connectivity, Hamiltonicity, MinDegree, Pancyclicity, PerfectMatching,
                       Property, property_from_id, validate_toughness_certificate)
from .errors import ParameterError
from .graph import Graph, Seed, make_rng, sample_subgraph

EXHAUSTIVE_MAX_N = 8
TOL = 1e-9
CAVEAT = ("one-sided: the adversary is heuristic, so a failure to destroy the property "
          "is evidence of resilience, not a proof")

HEURISTICS = ("exhaustive", "starvation", "cut", "independent", "hitting")


@dataclass
class DeletionPlan:
    G: Graph
    H: list[tuple[int, int]]
    r: float
    mode: str = "local"
    heuristic: str = ""
    certificate: list[int] | None = None  # X with c(G - H - X) > |X| when used

    def degrees(self) -> np.ndarray:
        d = np.zeros(self.G.n, dtype=np.int64)
        for u, v in self.H:
            d[u] += 1
            d[v] += 1
        return d

    @property
    def ratio(self) -> float:
        if self.mode == "global":
            return len(self.H) / self.G.m if self.G.m else 0.0
        return plan_ratio(self.G, self.H)

    def respects_budget(self) -> bool:
        if any(not self.G.has_edge(u, v) for u, v in self.H) or len(set(self.H)) != len(self.H):
            return False
        if self.mode == "global":
            return len(self.H) <= math.floor(self.r * self.G.m + TOL)
        return bool(np.all(self.degrees() <= local_budgets(self.G, self.r)))

    def remainder(self) -> Graph:
        return self.G.remove_edges(self.H)


@dataclass
class ResilienceEstimate:
    upper: float
    lower: float
    exact: bool
    plan: DeletionPlan | None = None
    heuristic: str = ""

    def __post_init__(self):
        if self.lower > self.upper + TOL:
            raise AssertionError("lower bound above upper bound")


def local_budgets(G: Graph, r: float) -> np.ndarray:
    return np.floor(r * G.degrees + TOL).astype(np.int64)


def plan_ratio(G: Graph, H) -> float:
    """max_v d_H(v)/d_G(v) (0 for an empty plan)."""
    if not H:
        return 0.0
    d = np.zeros(G.n, dtype=np.int64)
    for u, v in H:
        d[u] += 1
        d[v] += 1
    deg = G.degrees
    mask = d > 0
    return float(np.max(d[mask] / deg[mask]))


def exact_ratio(G: Graph, H) -> Fraction:
    best = Fraction(0)
    d = {}
    for u, v in H:
        d[u] = d.get(u, 0) + 1
        d[v] = d.get(v, 0) + 1
    for v, k in d.items():
        best = max(best, Fraction(k, G.degree(v)))
    return best


def _as_property(prop) -> Property:
    return property_from_id(prop) if isinstance(prop, str) else prop


# -- witness structures for the exact pass ----------------------------------------

def _cycles_by_length(G: Graph, lengths) -> dict[int, list[frozenset]]:
    """Edge sets of all cycles of the given lengths (each cycle once)."""
    want = set(lengths)
    adj = [sorted(a) for a in G.adj]
    out = {l: set() for l in want}
    top = max(want) if want else 0

    def pair(a, b):
        return (a, b) if a < b else (b, a)

    for s in range(G.n):
        path = [s]
        on = {s}

        def dfs():
            u = path[-1]
            for w in adj[u]:
                if w == s and len(path) >= 3 and len(path) in want and path[1] < path[-1]:
                    cyc = path + [s]
                    out[len(path)].add(frozenset(pair(a, b) for a, b in zip(cyc, cyc[1:])))
                elif w > s and w not in on and len(path) < top:
                    path.append(w)
                    on.add(w)
                    dfs()
                    on.discard(w)
                    path.pop()

        dfs()
    return {l: list(v) for l, v in out.items()}


def _perfect_matchings(G: Graph) -> list[frozenset]:
    """All matchings with floor(n/2) edges (one vertex left over when n is odd)."""
    out = []
    adj = G.adj

    def rec(left, acc, spare):
        if len(left) <= spare:
            out.append(frozenset(acc))
            return
        u = min(left)
        for w in sorted(adj[u]):
            if w in left:
                rec(left - {u, w}, acc + [(u, w)], spare)
        if spare:
            rec(left - {u}, acc, 0)

    rec(frozenset(range(G.n)), [], G.n % 2)
    return out


def _hitting_milp(G, edges, families, budgets=None):
    """Edge set meeting every family member: within ``budgets`` (any such set)
    or, without budgets, of least size.  None when infeasible."""
    idx = {e: i for i, e in enumerate(edges)}
    m = len(edges)
    A = np.zeros((len(families), m))
    for k, fam in enumerate(families):
        for e in fam:
            A[k, idx[e]] = 1.0
    cons = [LinearConstraint(A, lb=1.0, ub=np.inf)]
    if budgets is not None:
        B = np.zeros((G.n, m))
        for i, (u, v) in enumerate(edges):
            B[u, i] = 1.0
            B[v, i] = 1.0
        cons.append(LinearConstraint(B, lb=-np.inf, ub=np.asarray(budgets, dtype=float)))
        c = np.zeros(m)
    else:
        c = np.ones(m)
    res = milp(c, constraints=cons, integrality=np.ones(m), bounds=Bounds(0, 1))
    if res.x is None:
        return None
    return [edges[i] for i in range(m) if res.x[i] > 0.5]


def _lazy_hitting(G: Graph, survivors, budgets=None) -> list[tuple[int, int]] | None:
    """Hit every structure listed by ``survivors`` (graph -> list of edge sets),
    adding the structures that survive each candidate until none do."""
    edges = G.edges()
    fams: list[frozenset] = []
    H: list[tuple[int, int]] = []
    while True:
        new = survivors(G.remove_edges(H))
        if not new:
            return H
        fams.extend(new)
        H = _hitting_milp(G, edges, fams, budgets)
        if H is None:
            return None


def _min_ratio_hitting(G: Graph, survivors, lower: float = 0.0, upper: float = 2.0):
    """Least r (among the ratios k/d(v), in [lower, upper)) admitting a
    budget-respecting hitting set; None if there is none below ``upper``."""
    cands = [c for c in _candidate_ratios(G) if lower - TOL <= c < upper - TOL]
    if not cands:
        return None
    lo, hi = -1, len(cands) - 1
    first = _lazy_hitting(G, survivors, local_budgets(G, cands[0]))
    if first is not None:
        return first
    lo = 0
    best = _lazy_hitting(G, survivors, local_budgets(G, cands[hi]))
    if best is None:
        return None
    while hi - lo > 1:
        mid = (lo + hi) // 2
        H = _lazy_hitting(G, survivors, local_budgets(G, cands[mid]))
        if H is None:
            lo = mid
        else:
            hi, best = mid, H
    return best


def _dirac_lower(G: Graph) -> float:
    """Keeping degree >= n/2 everywhere keeps a Hamilton cycle, so some vertex
    must lose at least d(v) - ceil(n/2) + 1 edges."""
    need = G.degrees - (G.n + 1) // 2 + 1
    return float(np.min(np.clip(need, 0, None) / G.degrees))


def _best_of(G, plans, mode):
    key = (lambda H: exact_ratio(G, H)) if mode == "local" else len
    plans = [H for H in plans if H is not None]
    return min(plans, key=lambda H: (key(H), sorted(H))) if plans else None


def exact_destroying_plan(G: Graph, prop, mode: str = "local") -> list[tuple[int, int]]:
    """An optimal destroying plan for small G (local: least max ratio; global: fewest edges)."""
    prop = _as_property(prop)
    n = G.n
    if isinstance(prop, Connectivity):
        plans = []
        for bits in range(1, 2 ** (n - 1)):
            S = {0} | {v for v in range(1, n) if bits >> (v - 1) & 1}
            if len(S) == n:
                continue
            plans.append([(u, v) for u, v in G.edges() if (u in S) != (v in S)])
        return _best_of(G, plans, mode)
    if isinstance(prop, MinDegree):
        k = prop.k
        plans = []
        for v in range(n):
            need = G.degree(v) - k + 1
            if need <= 0:
                return []
            nb = sorted(G.adj[v], key=lambda u: (-G.degree(u), u))
            plans.append([tuple(sorted((v, u))) for u in nb[:need]])
        return _best_of(G, plans, mode)
    if isinstance(prop, Hamiltonicity):
        fam, lower = (lambda R: _cycles_by_length(R, [n])[n]), _dirac_lower(G)
    elif isinstance(prop, PerfectMatching):
        fam, lower = _perfect_matchings, _dirac_lower(G)
    elif isinstance(prop, Pancyclicity):
        plans = []
        for l in [3, n] + list(range(4, n)):
            f = (lambda l: lambda R: _cycles_by_length(R, [l])[l])(l)
            if mode == "global":
                plans.append(_lazy_hitting(G, f))
            else:
                best = _best_of(G, plans, mode)
                cap = float(exact_ratio(G, best)) if best is not None else 2.0
                plans.append(_min_ratio_hitting(G, f, upper=cap))
        return _best_of(G, plans, mode)
    else:
        raise ParameterError(f"no exact solver for {prop.name}")
    if mode == "global":
        return _lazy_hitting(G, fam)
    return _min_ratio_hitting(G, fam, lower)


# -- heuristic attacks ----------------------------------------------------------

def _starvation(G, prop, budgets, rng):
    k0 = max(prop.need_degree, 1)
    for v in sorted(range(G.n), key=lambda v: (G.degree(v), v)):
        need = G.degree(v) - k0 + 1
        if need <= 0:
            return [], None
        if need > budgets[v]:
            continue
        nb = [u for u in sorted(G.adj[v], key=lambda u: (-int(budgets[u]), u)) if budgets[u] >= 1]
        if len(nb) >= need:
            return [tuple(sorted((v, u))) for u in nb[:need]], None
    return None


def _excess(count, budgets, deg):
    """(max, total positive) of (count - budget)/deg along the last axis."""
    x = (count - budgets) / deg
    return x.max(axis=-1), np.clip(x, 0, None).sum(axis=-1)


def _cut_attack(G, prop, budgets, rng, starts=8, rounds=200):
    """Local search for a side S whose crossing edges fit the budgets."""
    n = G.n
    if n < 2:
        return None
    A = G.adj_matrix.astype(np.int64)
    deg = G.degrees.astype(float)
    parity = isinstance(prop, PerfectMatching)
    if parity and n % 2:
        return None
    for s in range(starts):
        k = max(1, n // 2 - (s % 2))
        if parity and k % 2 == 0:
            k += 1
        side = np.zeros(n, dtype=bool)
        side[rng.choice(n, size=min(k, n - 1), replace=False)] = True
        for _ in range(rounds):
            same = side[:, None] == side[None, :]
            cross = (A * ~same).sum(axis=1)
            cur = _excess(cross, budgets, deg)
            if cur[0] <= TOL:
                break
            # row v: crossing counts after flipping v
            new = cross[None, :] + A * np.where(same, 1, -1)
            new[np.arange(n), np.arange(n)] = A.sum(axis=1) - cross
            mx, tot = _excess(new, budgets, deg)
            sizes = side.sum() + np.where(side, -1, 1)
            ok = (sizes > 0) & (sizes < n)
            if parity:
                ok &= sizes % 2 == 1
            mx = np.where(ok, mx, np.inf)
            v = int(np.lexsort((rng.random(n), tot, mx))[0])
            if (mx[v], tot[v]) >= cur:
                break
            side[v] = ~side[v]
        cross = (A * (side[:, None] != side[None, :])).sum(axis=1)
        if _excess(cross, budgets, deg)[0] <= TOL:
            S = set(np.flatnonzero(side).tolist())
            return [(u, v) for u, v in G.edges() if (u in S) != (v in S)], None
    return None


def _independent_attack(G, prop, budgets, rng, starts=8, rounds=400):
    """Make a set S of size floor(n/2)+1 independent by deleting the edges inside it."""
    n = G.n
    if n < 3 or isinstance(prop, (Connectivity, MinDegree)):
        return None
    # |S| > n - |S| rules out a Hamilton cycle; a matching needs |S| > n - |S| + n % 2
    s = n // 2 + 1 + (n % 2 if isinstance(prop, PerfectMatching) else 0)
    if s > n:
        return None
    A = G.adj_matrix.astype(np.int64)
    deg = G.degrees.astype(float)
    for _ in range(starts):
        inS = np.zeros(n, dtype=bool)
        inS[rng.choice(n, size=s, replace=False)] = True
        for _ in range(rounds):
            S = np.flatnonzero(inS)
            O = np.flatnonzero(~inS)
            ins = A[:, S].sum(axis=1)
            cur = _excess(ins[S], budgets[S], deg[S])
            if cur[0] <= TOL:
                break
            best = None
            for i, a in enumerate(S):
                keep = np.delete(S, i)
                # rows: candidate b in O; columns: members of S - a + b
                cnt = ins[keep][None, :] - A[a, keep][None, :] + A[np.ix_(O, keep)]
                own = ins[O] - A[O, a]
                full = np.concatenate([cnt, own[:, None]], axis=1)
                bud = np.concatenate([np.broadcast_to(budgets[keep], cnt.shape), budgets[O][:, None]], axis=1)
                dd = np.concatenate([np.broadcast_to(deg[keep], cnt.shape), deg[O][:, None]], axis=1)
                mx, tot = _excess(full, bud, dd)
                j = int(np.lexsort((tot, mx))[0])
                if best is None or (mx[j], tot[j]) < best[0]:
                    best = ((mx[j], tot[j]), a, O[j])
            if best[0] >= cur:
                break
            inS[best[1]] = False
            inS[best[2]] = True
        S = np.flatnonzero(inS)
        if _excess(A[np.ix_(S, S)].sum(axis=1), budgets[S], deg[S])[0] <= TOL:
            Sset = set(S.tolist())
            H = [(u, v) for u, v in G.edges() if u in Sset and v in Sset]
            return H, sorted(set(range(n)) - Sset)
    return None


def _hitting_attack(G, prop, budgets, rng, max_steps=None):
    """Delete edges of successive witnesses while budgets allow."""
    rem = budgets.copy()
    H: list[tuple[int, int]] = []
    cur = G
    steps = max_steps or G.m
    for _ in range(steps):
        res = prop.check(cur)
        if res.status == NO:
            return H, None
        if not res.holds:
            return None
        w = res.witness
        if isinstance(w, dict):  # pancyclicity: attack the length with fewest cycles found
            w = w[min(w)]
        if not isinstance(w, (list, tuple)) or not w:
            return None
        if isinstance(w[0], (tuple, list)):
            cand = [tuple(sorted(e)) for e in w]
        else:
            cyc = list(w)
            cand = [tuple(sorted((a, b))) for a, b in zip(cyc, cyc[1:] + cyc[:1])]
        cand = [e for e in cand if rem[e[0]] > 0 and rem[e[1]] > 0]
        if not cand:
            return None
        e = max(cand, key=lambda e: (min(rem[e[0]] / G.degree(e[0]), rem[e[1]] / G.degree(e[1])), e))
        H.append(e)
        rem[e[0]] -= 1
        rem[e[1]] -= 1
        cur = cur.remove_edges([e])
    return None


def adversary_destroy(G: Graph, prop, r: float, mode: str = "local", heuristics=None,
                      seed=0, exhaustive: bool | None = None) -> DeletionPlan | None:
    """First budget-respecting plan found whose deletion destroys the property.

    Returns None when every attack fails.  Every returned plan is checked for
    budget and for destruction (a checker NO or a validated toughness
    certificate).
    """
    if not 0.0 <= r <= 1.0:
        raise ParameterError("r must lie in [0, 1]")
    if mode not in ("local", "global"):
        raise ParameterError(f"unknown mode {mode!r}")
    prop = _as_property(prop)
    rng = make_rng(seed)
    if exhaustive is None:
        exhaustive = G.n <= EXHAUSTIVE_MAX_N
    names = list(heuristics) if heuristics is not None else list(HEURISTICS)
    if not exhaustive and "exhaustive" in names:
        names.remove("exhaustive")
    budgets = local_budgets(G, r) if mode == "local" else None
    for name in names:
        if name == "exhaustive":
            H = exact_destroying_plan(G, prop, mode)
            out = (H, None) if H is not None else None
        elif mode == "global":
            continue
        elif name == "starvation":
            out = _starvation(G, prop, budgets, rng)
        elif name == "cut":
            out = _cut_attack(G, prop, budgets, rng)
        elif name == "independent":
            out = _independent_attack(G, prop, budgets, rng)
        elif name == "hitting":
            if isinstance(prop, (Hamiltonicity, Pancyclicity)) and G.n > 20:
                continue
            out = _hitting_attack(G, prop, budgets, rng)
        else:
            raise ParameterError(f"unknown heuristic {name!r}")
        if out is None:
            continue
        H, cert = out
        plan = DeletionPlan(G, sorted(set(H)), r, mode, name, cert)
        if not plan.respects_budget():
            continue
        rest = plan.remainder()
        if (cert is not None and isinstance(prop, (Hamiltonicity, Pancyclicity))
                and validate_toughness_certificate(rest, cert)):
            return plan
        if prop.check(rest).status == NO:
            plan.certificate = None
            return plan
    return None


def _candidate_ratios(G: Graph) -> list[float]:
    vals = {k / d for d in set(G.degrees.tolist()) if d > 0 for k in range(0, d + 1)}
    return sorted(vals)


def estimate_local_resilience(G: Graph, prop, precision: float = 1 / 64, seed=0,
                              exhaustive: bool | None = None,
                              heuristics=None) -> ResilienceEstimate:
    """Upper bound by binary search over r with adversary_destroy; exact for n <= 8."""
    if precision <= 0:
        raise ParameterError("precision must be positive")
    prop = _as_property(prop)
    if not prop.check(G).holds:
        raise ParameterError(f"G does not have {prop.name}")
    if exhaustive is None:
        exhaustive = G.n <= EXHAUSTIVE_MAX_N
    deg = G.degrees
    trivial_lower = 1.0 / float(deg.max()) if deg.max() > 0 else 0.0
    if exhaustive:
        H = exact_destroying_plan(G, prop, "local")
        val = float(exact_ratio(G, H))
        plan = DeletionPlan(G, sorted(H), val, "local", "exhaustive")
        return ResilienceEstimate(val, val, True, plan, "exhaustive")
    cands = [c for c in _candidate_ratios(G) if c > 0]
    names = [h for h in (heuristics or HEURISTICS) if h != "exhaustive"]
    lo, hi = -1, len(cands) - 1
    plan = adversary_destroy(G, prop, cands[hi], "local", names, seed, exhaustive=False)
    if plan is None:
        return ResilienceEstimate(1.0, trivial_lower, False, None, "")
    while hi - lo > 1 and (lo < 0 or cands[hi] - cands[lo] > precision):
        mid = (lo + hi) // 2
        p = adversary_destroy(G, prop, cands[mid], "local", names, seed, exhaustive=False)
        if p is not None:
            hi, plan = mid, p
        else:
            lo = mid
    up = min(cands[hi], plan.ratio)
    return ResilienceEstimate(up, min(trivial_lower, up), False, plan, plan.heuristic)


@dataclass
class GPRResult:
    fraction: float
    ci: tuple[float, float]
    trials: int
    outcomes: list[dict] = field(default_factory=list)
    caveat: str = CAVEAT

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=["trial", "seed", "r", "destroyed", "heuristic"],
                           lineterminator="\n")
        w.writeheader()
        w.writerows(self.outcomes)
        return buf.getvalue()


def wilson_interval(k: int, n: int, z: float = 1.959963984540054) -> tuple[float, float]:
    if n == 0:
        return (0.0, 1.0)
    ph = k / n
    den = 1 + z * z / n
    mid = (ph + z * z / (2 * n)) / den
    half = z * math.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / den
    return (max(0.0, mid - half), min(1.0, mid + half))


def check_gpr_resilient(host, p: float, r: float, prop, trials: int, seed=0,
                        heuristics=None) -> GPRResult:
    """Fraction of samples G' ~ G(host, p) on which the adversary fails at r.

    ``host`` is a Graph or a callable seed -> Graph.  A sample that lacks the
    property outright counts as destroyed.
    """
    if trials < 1:
        raise ParameterError("trials must be at least 1")
    prop = _as_property(prop)
    base = seed if isinstance(seed, Seed) else Seed(int(seed))
    survived = 0
    rows = []
    for i in range(trials):
        s = base.spawn(base.stream + i)
        G = host(s) if callable(host) else host
        Gp = sample_subgraph(G, p, s)
        if not prop.check(Gp).holds:
            destroyed, how = True, "absent"
        else:
            plan = adversary_destroy(Gp, prop, r, "local", heuristics, seed=make_rng(s, 7))
            destroyed, how = plan is not None, plan.heuristic if plan else ""
        survived += not destroyed
        rows.append({"trial": i, "seed": s.value, "r": r, "destroyed": destroyed, "heuristic": how})
    return GPRResult(survived / trials, wilson_interval(survived, trials), trials, rows)
