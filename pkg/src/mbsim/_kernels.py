"""numba kernels for the hot loops: MinBox self-play and bitmask path DPs."""

import numpy as np
from numba import njit

ADV_RANDOM = 0
ADV_GREEDY = 1
ADV_SPREAD = 2

MOVER_BREAKER = 0
MOVER_MAKER = 1

NEG_INF = -np.inf


@njit(cache=True)
def _max_active_danger(sizes, need, w_M, w_B, b):
    best = NEG_INF
    for i in range(sizes.shape[0]):
        if w_M[i] < need[i]:
            d = w_B[i] - b * w_M[i]
            if d > best:
                best = d
    return best


@njit(cache=True)
def _select_S(sizes, need, w_M, w_B, b):
    best = -1
    best_d = 0
    for i in range(sizes.shape[0]):
        if w_M[i] < need[i] and sizes[i] - w_M[i] - w_B[i] > 0:
            d = w_B[i] - b * w_M[i]
            if best < 0 or d > best_d:
                best = i
                best_d = d
    return best


@njit(cache=True)
def minbox_selfplay(sizes, need, b, adv, extra_prob, u, bound, record):
    """Breaker-first MinBox game with a built-in adversary.

    Returns (w_M, w_B, max_danger, violations, n_moves, movers, boxes, dmax,
    claim_boxes).  ``boxes`` holds Maker's box per Maker move (-1 = pass) and
    the offset into ``claim_boxes`` per Breaker move.
    """
    n = sizes.shape[0]
    w_M = np.zeros(n, np.int64)
    w_B = np.zeros(n, np.int64)
    total = 0
    for i in range(n):
        total += sizes[i]
    cap = 2 * total + 2 if record else 1
    movers = np.zeros(cap, np.int8)
    boxes = np.zeros(cap, np.int64)
    dmax = np.zeros(cap, np.float64)
    claim_boxes = np.zeros(total + 1 if record else 1, np.int64)
    n_claims = 0
    k = 0
    ui = 0
    max_d = NEG_INF
    violations = 0
    free_total = total
    wB_tmp = np.zeros(n, np.int64)
    while free_total > 0:
        # Breaker
        kk = b if b < free_total else free_total
        if record:
            movers[k] = MOVER_BREAKER
            boxes[k] = n_claims
        for i in range(n):
            wB_tmp[i] = w_B[i]
        for _ in range(kk):
            pick = -1
            if adv == ADV_RANDOM:
                r = np.int64(np.floor(u[ui] * free_total))
                ui += 1
                acc = 0
                for i in range(n):
                    acc += sizes[i] - w_M[i] - w_B[i]
                    if acc > r:
                        pick = i
                        break
            elif adv == ADV_GREEDY:
                best_d = 0
                for i in range(n):
                    if w_M[i] < need[i] and sizes[i] - w_M[i] - w_B[i] > 0:
                        d = w_B[i] - b * w_M[i]
                        if pick < 0 or d > best_d:
                            pick = i
                            best_d = d
            else:
                best_m = 0
                best_b = 0
                for i in range(n):
                    if w_M[i] < need[i] and sizes[i] - w_M[i] - w_B[i] > 0:
                        if (pick < 0 or w_M[i] < best_m
                                or (w_M[i] == best_m and wB_tmp[i] < best_b)):
                            pick = i
                            best_m = w_M[i]
                            best_b = wB_tmp[i]
            if pick < 0:
                for i in range(n):
                    if sizes[i] - w_M[i] - w_B[i] > 0:
                        pick = i
                        break
            w_B[pick] += 1
            wB_tmp[pick] += 1
            free_total -= 1
            if record:
                claim_boxes[n_claims] = pick
            n_claims += 1
        d = _max_active_danger(sizes, need, w_M, w_B, b)
        if d > bound:
            violations += 1
        if d > max_d:
            max_d = d
        if record:
            dmax[k] = d
        k += 1
        if free_total == 0:
            break
        # Maker: strategy S
        pick = _select_S(sizes, need, w_M, w_B, b)
        if pick >= 0:
            w_M[pick] += 1
            free_total -= 1
        if extra_prob > 0.0 and free_total > 0:
            r0 = u[ui]
            ui += 1
            if r0 < extra_prob:
                cnt = 0
                for i in range(n):
                    if sizes[i] - w_M[i] - w_B[i] > 0:
                        cnt += 1
                r = np.int64(np.floor(u[ui] * cnt))
                ui += 1
                j = -1
                for i in range(n):
                    if sizes[i] - w_M[i] - w_B[i] > 0:
                        j += 1
                        if j == r:
                            w_M[i] += 1
                            free_total -= 1
                            break
        d = _max_active_danger(sizes, need, w_M, w_B, b)
        if d > bound:
            violations += 1
        if d > max_d:
            max_d = d
        if record:
            movers[k] = MOVER_MAKER
            boxes[k] = pick
            dmax[k] = d
        k += 1
    return w_M, w_B, max_d, violations, k, movers, boxes, dmax, claim_boxes


# -- bitmask path DPs --------------------------------------------------------

@njit(cache=True)
def paths_from(adj, n, src):
    """dp[mask] = bitset of t such that some path src..t visits exactly mask."""
    size = 1 << n
    dp = np.zeros(size, np.int64)
    dp[1 << src] = 1 << src
    for mask in range(size):
        ends = dp[mask]
        if ends == 0:
            continue
        e = ends
        while e:
            t = 0
            low = e & (-e)
            while (np.int64(1) << t) != low:
                t += 1
            e ^= low
            nb = adj[t] & ~mask
            while nb:
                lw = nb & (-nb)
                dp[mask | lw] |= lw
                nb ^= lw
    return dp


@njit(cache=True)
def hamilton_cycle_dp(adj, n):
    """Return the DP table from vertex 0 (cycle exists iff dp[full] meets adj[0])."""
    return paths_from(adj, n, 0)


@njit(cache=True)
def cycle_lengths(adj, n):
    """For each length l, (s, mask, t) of one cycle whose least vertex is s.

    found[l, 0] = -1 when no cycle of length l exists.
    """
    found = np.full((n + 1, 3), -1, np.int64)
    remaining = n - 2 if n >= 3 else 0
    for s in range(n):
        if remaining == 0:
            break
        if n - s < 3:
            break
        # paths from s using only vertices >= s
        size = 1 << n
        dp = np.zeros(size, np.int64)
        dp[1 << s] = 1 << s
        hi_mask = ~((np.int64(1) << s) - 1)
        for mask in range(1 << s, size):
            ends = dp[mask]
            if ends == 0:
                continue
            pc = 0
            mm = mask
            while mm:
                mm &= mm - 1
                pc += 1
            if pc >= 3 and found[pc, 0] < 0:
                close = ends & adj[s]
                if close:
                    low = close & (-close)
                    t = 0
                    while (np.int64(1) << t) != low:
                        t += 1
                    found[pc, 0] = s
                    found[pc, 1] = mask
                    found[pc, 2] = t
                    remaining -= 1
            e = ends
            while e:
                low = e & (-e)
                t = 0
                while (np.int64(1) << t) != low:
                    t += 1
                e ^= low
                nb = adj[t] & ~mask & hi_mask
                while nb:
                    lw = nb & (-nb)
                    dp[mask | lw] |= lw
                    nb ^= lw
    return found


@njit(cache=True)
def paths_from_restricted(adj, n, src, allowed):
    """Like paths_from but only over vertices in the bitset ``allowed``."""
    size = 1 << n
    dp = np.zeros(size, np.int64)
    dp[1 << src] = 1 << src
    for mask in range(size):
        ends = dp[mask]
        if ends == 0:
            continue
        e = ends
        while e:
            low = e & (-e)
            t = 0
            while (np.int64(1) << t) != low:
                t += 1
            e ^= low
            nb = adj[t] & ~mask & allowed
            while nb:
                lw = nb & (-nb)
                dp[mask | lw] |= lw
                nb ^= lw
    return dp


@njit(cache=True)
def longest_through_pair(adj, n, x, y):
    """Vertex count of a longest path of G + xy that uses the pair xy.

    ``adj`` may or may not contain the pair.  Returns (best, ham) where ham
    says whether G has a Hamilton x-y path (a Hamilton cycle of G + xy through xy).
    """
    full = (np.int64(1) << n) - 1
    bx = np.int64(1) << x
    by = np.int64(1) << y
    dpx = paths_from(adj, n, x)
    dpy = paths_from_restricted(adj, n, y, full & ~bx)
    ham = n >= 3 and (dpx[full] & by) != 0
    # bestY[S] = max |B| over B subset of S with a path from y visiting exactly B
    size = 1 << n
    best_y = np.zeros(size, np.int64)
    for mask in range(size):
        if (mask & by) and dpy[mask] != 0:
            pc = 0
            mm = mask
            while mm:
                mm &= mm - 1
                pc += 1
            best_y[mask] = pc
    for bit in range(n):
        step = np.int64(1) << bit
        for mask in range(size):
            if mask & step:
                other = best_y[mask ^ step]
                if other > best_y[mask]:
                    best_y[mask] = other
    best = 0
    for mask in range(size):
        if (mask & bx) and not (mask & by) and dpx[mask] != 0:
            rest = best_y[full & ~mask]
            if rest > 0:
                pc = 0
                mm = mask
                while mm:
                    mm &= mm - 1
                    pc += 1
                if pc + rest > best:
                    best = pc + rest
    return best, ham


@njit(cache=True)
def longest_path_through_pair_witness(adj, n, x, y):
    """Masks (A, B) realising a longest path through xy: x-side A, y-side B."""
    full = (np.int64(1) << n) - 1
    bx = np.int64(1) << x
    by = np.int64(1) << y
    dpx = paths_from_restricted(adj, n, x, full & ~by)
    dpy = paths_from_restricted(adj, n, y, full & ~bx)
    best = 0
    best_a = 0
    best_b = 0
    size = 1 << n
    for a in range(size):
        if not (a & bx) or dpx[a] == 0:
            continue
        comp = full & ~a
        # enumerate submasks of comp containing y
        sub = comp
        while True:
            if (sub & by) and dpy[sub] != 0:
                pc = 0
                mm = a | sub
                while mm:
                    mm &= mm - 1
                    pc += 1
                if pc > best:
                    best = pc
                    best_a = a
                    best_b = sub
            if sub == 0:
                break
            sub = (sub - 1) & comp
    return best, best_a, best_b
