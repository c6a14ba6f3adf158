"""Compiled inner loops.

Graphs are passed as a padded neighbor table ``nbr`` (n x cap, unused slots -1)
plus a degree vector ``deg``. Distance matrices are int32 with -1 for
unreachable pairs.
"""

import numpy as np
from numba import njit

# evaluate_swap status codes
SWAP_OK = 0
SWAP_DISCONNECTED = 1
SWAP_DIAMETER = 2
SWAP_BOUND = 3
NO_LIMIT = np.int64(2**62)


@njit(cache=True)
def bfs_row(nbr, deg, s, out, queue):
    n = deg.shape[0]
    for v in range(n):
        out[v] = -1
    out[s] = 0
    queue[0] = s
    head = 0
    tail = 1
    while head < tail:
        u = queue[head]
        head += 1
        du = out[u] + 1
        for t in range(deg[u]):
            w = nbr[u, t]
            if out[w] < 0:
                out[w] = du
                queue[tail] = w
                tail += 1
    return tail


@njit(cache=True)
def apsp(nbr, deg):
    n = deg.shape[0]
    dist = np.empty((n, n), dtype=np.int32)
    queue = np.empty(n, dtype=np.int32)
    for s in range(n):
        bfs_row(nbr, deg, s, dist[s], queue)
    return dist


@njit(cache=True)
def add_edge(nbr, deg, u, v):
    nbr[u, deg[u]] = v
    deg[u] += 1
    nbr[v, deg[v]] = u
    deg[v] += 1


@njit(cache=True)
def _drop(nbr, deg, u, v):
    last = deg[u] - 1
    for t in range(deg[u]):
        if nbr[u, t] == v:
            nbr[u, t] = nbr[u, last]
            nbr[u, last] = -1
            deg[u] = last
            return


@njit(cache=True)
def remove_edge(nbr, deg, u, v):
    _drop(nbr, deg, u, v)
    _drop(nbr, deg, v, u)


@njit(cache=True)
def has_edge(nbr, deg, u, v):
    for t in range(deg[u]):
        if nbr[u, t] == v:
            return True
    return False


# ---------------------------------------------------------------- growth


@njit(cache=True)
def count_paths_vector(nbr, deg, dist, i, cp):
    """cp[k] = |D1(i) & D2(k)| + |D2(i) & D1(k)| for every node k."""
    n = deg.shape[0]
    for k in range(n):
        cp[k] = 0
    row_i = dist[i]
    for t in range(deg[i]):
        u = nbr[i, t]
        row_u = dist[u]
        for k in range(n):
            if row_u[k] == 2:
                cp[k] += 1
    for u in range(n):
        if row_i[u] == 2:
            for t in range(deg[u]):
                cp[nbr[u, t]] += 1


@njit(cache=True)
def select_target(nbr, deg, dist, i, cap, priority, cp):
    """Pick j with d(i, j) > 2 and deg(j) < cap: min p1, then max p2, then min priority."""
    n = deg.shape[0]
    row_i = dist[i]
    count_paths_vector(nbr, deg, dist, i, cp)
    best_p1 = -1
    for j in range(n):
        if row_i[j] > 2 and deg[j] < cap:
            if best_p1 < 0 or cp[j] < best_p1:
                best_p1 = cp[j]
    if best_p1 < 0:
        return -1
    best_j = -1
    best_p2 = -1
    for j in range(n):
        if row_i[j] > 2 and deg[j] < cap and cp[j] == best_p1:
            p2 = 0
            for t in range(deg[j]):
                c = cp[nbr[j, t]]
                if c > p2:
                    p2 = c
            if p2 > best_p2 or (p2 == best_p2 and priority[j] < priority[best_j]):
                best_p2 = p2
                best_j = j
    return best_j


@njit(cache=True)
def relax_insert(dist, i, j, old_i, old_j):
    """Exact distance update after inserting edge i-j; old_* are pre-insertion rows."""
    n = dist.shape[0]
    for u in range(n):
        a = old_i[u]
        b = old_j[u]
        if a - b >= 2:
            src = old_i
            base = b + 1
        elif b - a >= 2:
            src = old_j
            base = a + 1
        else:
            continue
        row = dist[u]
        for v in range(n):
            t = base + src[v]
            if t < row[v]:
                row[v] = t


@njit(cache=True)
def insert_and_relax(nbr, deg, dist, i, j):
    old_i = dist[i].copy()
    old_j = dist[j].copy()
    add_edge(nbr, deg, i, j)
    relax_insert(dist, i, j, old_i, old_j)


@njit(cache=True)
def grow(nbr, deg, dist, cap, priority, recompute_every, out_u, out_v, out_d):
    """Greedy insertion loop. Returns the number of edges added.

    Each added edge is logged to out_* together with its pre-insertion distance.
    """
    n = deg.shape[0]
    order = np.argsort(priority, kind="mergesort")
    cp = np.empty(n, dtype=np.int64)
    row = np.empty(n, dtype=np.int32)
    queue = np.empty(n, dtype=np.int32)
    cursor = 0
    added = 0
    while True:
        lowest = cap
        for v in range(n):
            if deg[v] < lowest:
                lowest = deg[v]
        if lowest >= cap:
            break
        second = cap
        for v in range(n):
            if deg[v] > lowest and deg[v] < second:
                second = deg[v]
        pick_i = -1
        pick_j = -1
        for level_idx in range(2):
            level = lowest if level_idx == 0 else second
            if level >= cap:
                break
            for idx in range(n):
                i = order[idx]
                if deg[i] != level:
                    continue
                j = select_target(nbr, deg, dist, i, cap, priority, cp)
                if j >= 0:
                    pick_i = i
                    pick_j = j
                    break
            if pick_i >= 0:
                break
        if pick_i < 0:
            break
        out_u[added] = pick_i
        out_v[added] = pick_j
        out_d[added] = dist[pick_i, pick_j]
        insert_and_relax(nbr, deg, dist, pick_i, pick_j)
        added += 1
        if recompute_every > 0 and added % recompute_every == 0:
            cursor = refresh_rows(nbr, deg, dist, cursor, REFRESH_ROWS, row, queue)
    return added


REFRESH_ROWS = 64


@njit(cache=True)
def refresh_rows(nbr, deg, dist, cursor, count, row, queue):
    """Re-BFS `count` rows starting at `cursor`; on any mismatch rebuild everything.

    Returns the next cursor.
    """
    n = deg.shape[0]
    for k in range(min(count, n)):
        s = (cursor + k) % n
        bfs_row(nbr, deg, s, row, queue)
        for v in range(n):
            if row[v] != dist[s, v]:
                dist[:, :] = apsp(nbr, deg)
                return (cursor + count) % n
    return (cursor + count) % n


# ---------------------------------------------------------------- importance


@njit(cache=True)
def importance_histogram(nbr, deg, dist, eu, ev, width):
    """hist[e, c] = number of sources i for which edge e has |J| = c."""
    n = deg.shape[0]
    m = eu.shape[0]
    hist = np.zeros((m, width), dtype=np.int32)
    parents = np.empty(n, dtype=np.int32)
    for s in range(n):
        row = dist[s]
        for v in range(n):
            target = row[v] - 1
            c = 0
            for t in range(deg[v]):
                if row[nbr[v, t]] == target:
                    c += 1
            parents[v] = c
        for e in range(m):
            du = row[eu[e]]
            dv = row[ev[e]]
            if du == dv:
                continue
            far = ev[e] if dv > du else eu[e]
            hist[e, parents[far]] += 1
    return hist


# ---------------------------------------------------------------- 2-opt


def _debruijn_table():
    table = np.zeros(64, dtype=np.int64)
    for k in range(64):
        table[(((1 << k) * 0x03F79D71B4CB0A89) & (2**64 - 1)) >> 58] = k
    return table


DEBRUIJN = _debruijn_table()
DEBRUIJN_MUL = np.uint64(0x03F79D71B4CB0A89)
ONE = np.uint64(1)
SHIFT58 = np.uint64(58)


@njit(cache=True)
def adjacency_bits(nbr, deg):
    n = deg.shape[0]
    words = (n + 63) // 64
    bits = np.zeros((n, words), dtype=np.uint64)
    for u in range(n):
        for t in range(deg[u]):
            v = nbr[u, t]
            bits[u, v >> 6] |= ONE << np.uint64(v & 63)
    return bits


@njit(cache=True)
def _flip_bits(bits, u, v):
    bits[u, v >> 6] ^= ONE << np.uint64(v & 63)
    bits[v, u >> 6] ^= ONE << np.uint64(u & 63)


@njit(cache=True)
def _flip_swap(bits, removed, added):
    for r in range(removed.shape[0]):
        _flip_bits(bits, removed[r, 0], removed[r, 1])
    for r in range(added.shape[0]):
        _flip_bits(bits, added[r, 0], added[r, 1])


M1 = np.uint64(0x5555555555555555)
M2 = np.uint64(0x3333333333333333)
M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
H01 = np.uint64(0x0101010101010101)
ALL = np.uint64(0xFFFFFFFFFFFFFFFF)


@njit(cache=True)
def _popcount(x):
    x = x - ((x >> ONE) & M1)
    x = (x & M2) + ((x >> np.uint64(2)) & M2)
    x = (x + (x >> np.uint64(4))) & M4
    return np.int64((x * H01) >> np.uint64(56))


@njit(cache=True)
def _lowbit_index(low):
    return DEBRUIJN[(low * DEBRUIJN_MUL) >> SHIFT58]


@njit(cache=True)
def bfs_bits_stats(bits, s, visited, frontier, acc, max_level):
    """Direction-optimizing BFS from s over adjacency bitsets.

    Returns (distance_sum, eccentricity, reached). Gives up as soon as a level
    beyond max_level would be needed, returning that level as eccentricity.
    """
    n = bits.shape[0]
    words = bits.shape[1]
    tail = n - (words - 1) * 64
    last_mask = ALL if tail == 64 else (ONE << np.uint64(tail)) - ONE
    for w in range(words):
        visited[w] = 0
        frontier[w] = 0
    visited[s >> 6] |= ONE << np.uint64(s & 63)
    frontier[s >> 6] |= ONE << np.uint64(s & 63)
    fcount = 1
    level = 0
    total = np.int64(0)
    reached = 1
    while reached < n:
        level += 1
        if level > max_level:
            return total, level, reached
        unvisited = n - reached
        if fcount <= unvisited:
            # push: union of the frontier's neighborhoods
            for w in range(words):
                acc[w] = 0
            for fw in range(words):
                x = frontier[fw]
                base = fw * 64
                while x != 0:
                    low = x & (~x + ONE)
                    v = base + _lowbit_index(low)
                    for w in range(words):
                        acc[w] |= bits[v, w]
                    x ^= low
            for w in range(words):
                acc[w] &= ~visited[w]
        else:
            # pull: unvisited nodes with a neighbor in the frontier
            for uw in range(words):
                x = ~visited[uw]
                if uw == words - 1:
                    x &= last_mask
                acc[uw] = 0
                base = uw * 64
                while x != 0:
                    low = x & (~x + ONE)
                    v = base + _lowbit_index(low)
                    for w in range(words):
                        if bits[v, w] & frontier[w]:
                            acc[uw] |= low
                            break
                    x ^= low
        fcount = 0
        for w in range(words):
            frontier[w] = acc[w]
            visited[w] |= acc[w]
            fcount += _popcount(acc[w])
        if fcount == 0:
            level -= 1
            break
        total += level * fcount
        reached += fcount
    return total, level, reached


@njit(cache=True)
def parent_counts(nbr, deg, dist):
    """pc[v, s] = number of neighbors of v one hop closer to s than v is."""
    n = deg.shape[0]
    pc = np.zeros((n, n), dtype=np.int16)
    for v in range(n):
        _parent_col(nbr, deg, dist, v, pc[v])
    return pc


@njit(cache=True)
def _parent_col(nbr, deg, dist, v, out):
    # dist is symmetric, so row v holds d(s, v) for every source s
    n = deg.shape[0]
    dv = dist[v]
    for s in range(n):
        out[s] = 0
    for t in range(deg[v]):
        dw = dist[nbr[v, t]]
        for s in range(n):
            if dw[s] == dv[s] - 1:
                out[s] += 1


@njit(cache=True)
def _parent_count(nbr, deg, row, v):
    target = row[v] - 1
    c = 0
    for t in range(deg[v]):
        if row[nbr[v, t]] == target:
            c += 1
    return c


DIRTY_REMOVED = 1
DIRTY_BRIDGED = 2


@njit(cache=True)
def dirty_sources(dist, pc, removed, added, dirty):
    """Flag rows whose distances can change under the swap; returns the count.

    DIRTY_REMOVED: a removed edge is the only parent edge of its far end as
    seen from s. DIRTY_BRIDGED: an added edge joins nodes whose distances from
    s differ by two or more. Rows flagged only DIRTY_REMOVED can only grow,
    rows flagged only DIRTY_BRIDGED can only shrink. Removed edges must not
    share endpoints.
    """
    n = dist.shape[0]
    a0 = dist[removed[0, 0]]
    a1 = dist[removed[0, 1]]
    b0 = dist[removed[1, 0]]
    b1 = dist[removed[1, 1]]
    pa0 = pc[removed[0, 0]]
    pa1 = pc[removed[0, 1]]
    pb0 = pc[removed[1, 0]]
    pb1 = pc[removed[1, 1]]
    x0 = dist[added[0, 0]]
    y0 = dist[added[0, 1]]
    x1 = dist[added[1, 0]]
    y1 = dist[added[1, 1]]
    count = 0
    # bitwise ops instead of and/or keep the loop branch-free
    for s in range(n):
        cut = (((a0[s] < a1[s]) & (pa1[s] == 1)) | ((a1[s] < a0[s]) & (pa0[s] == 1))
               | ((b0[s] < b1[s]) & (pb1[s] == 1)) | ((b1[s] < b0[s]) & (pb0[s] == 1)))
        d0 = x0[s] - y0[s]
        d1 = x1[s] - y1[s]
        bridge = (d0 * d0 >= 4) | (d1 * d1 >= 4)
        flag = np.int8(cut) | (np.int8(bridge) << 1)
        dirty[s] = flag
        count += flag != 0
    return count


@njit(cache=True)
def evaluate_swap(bits, dist, pc, rowsum, ecc, removed, added, max_diam, limit, work, dirty):
    """Score a swap without committing it.

    Returns (status, ordered_distance_sum, diameter). Evaluation stops early
    with SWAP_DIAMETER once some eccentricity exceeds max_diam, and with
    SWAP_BOUND once the diameter is pinned at max_diam and the distance sum
    provably exceeds `limit`.
    """
    n = dist.shape[0]
    dirty_sources(dist, pc, removed, added, dirty)
    total = np.int64(0)
    pending = np.int64(0)  # old sums of rows that can only grow
    diam = 0
    for s in range(n):
        f = dirty[s]
        if f == 0:
            total += rowsum[s]
            if ecc[s] > diam:
                diam = ecc[s]
        elif f == DIRTY_REMOVED:
            pending += rowsum[s]
    if diam > max_diam:
        return SWAP_DIAMETER, total, diam
    _flip_swap(bits, removed, added)
    status = SWAP_OK
    visited = work[0]
    frontier = work[1]
    acc = work[2]
    # rows that may shrink first: afterwards every unfinished row is bounded below by its old sum
    for growing in range(2):
        if diam >= max_diam and total + pending > limit:
            status = SWAP_BOUND
            break
        for s in range(n):
            f = dirty[s]
            if f == 0 or (f == DIRTY_REMOVED) != (growing == 1):
                continue
            if f == DIRTY_BRIDGED:
                # distances only shrink: nothing lies beyond the old eccentricity
                sub, e, reached = bfs_bits_stats(bits, s, visited, frontier, acc, ecc[s] - 1)
                if e > ecc[s] - 1:
                    sub += np.int64(ecc[s]) * (n - reached)
                    e = ecc[s]
                    reached = n
            else:
                sub, e, reached = bfs_bits_stats(bits, s, visited, frontier, acc, max_diam)
            if e > max_diam:
                status = SWAP_DIAMETER
                diam = e
                break
            if reached < n:
                status = SWAP_DISCONNECTED
                break
            total += sub
            if e > diam:
                diam = e
            if growing:
                pending -= rowsum[s]
                if diam >= max_diam and total + pending > limit:
                    status = SWAP_BOUND
                    break
        if status != SWAP_OK:
            break
    _flip_swap(bits, removed, added)
    return status, total, diam


@njit(cache=True)
def _mutate(nbr, deg, removed, added):
    for r in range(removed.shape[0]):
        remove_edge(nbr, deg, removed[r, 0], removed[r, 1])
    for r in range(added.shape[0]):
        add_edge(nbr, deg, added[r, 0], added[r, 1])


@njit(cache=True)
def commit_swap(nbr, deg, bits, dist, pc, rowsum, ecc, removed, added):
    """Apply a swap and bring every derived array up to date. Returns #rows redone."""
    n = deg.shape[0]
    dirty = np.zeros(n, dtype=np.int8)
    nd = dirty_sources(dist, pc, removed, added, dirty)
    _mutate(nbr, deg, removed, added)
    _flip_swap(bits, removed, added)
    queue = np.empty(n, dtype=np.int32)
    for s in range(n):
        if not dirty[s]:
            continue
        row = dist[s]
        bfs_row(nbr, deg, s, row, queue)
        acc = np.int64(0)
        mx = 0
        for v in range(n):
            dist[v, s] = row[v]
            acc += row[v]
            if row[v] > mx:
                mx = row[v]
        rowsum[s] = acc
        ecc[s] = mx
    for s in range(n):
        if dirty[s]:
            row = dist[s]
            for v in range(n):
                pc[v, s] = _parent_count(nbr, deg, row, v)
    for r in range(2):
        for c in range(2):
            _parent_col(nbr, deg, dist, removed[r, c], pc[removed[r, c]])
    return nd


@njit(cache=True)
def swap_distances(nbr, deg, dist, removed, added):
    """Apply a swap to nbr/deg and update dist in place, redoing only affected rows."""
    n = deg.shape[0]
    bits = adjacency_bits(nbr, deg)
    pc = parent_counts(nbr, deg, dist)
    rowsum = np.zeros(n, dtype=np.int64)
    ecc = np.zeros(n, dtype=np.int32)
    return commit_swap(nbr, deg, bits, dist, pc, rowsum, ecc, removed, added)


@njit(cache=True)
def pad_rows(flat, deg, width):
    """Padded neighbor table (unused slots -1) from concatenated adjacency rows."""
    nbr = np.full((deg.shape[0], width), -1, dtype=np.int32)
    k = 0
    for u in range(deg.shape[0]):
        for t in range(deg[u]):
            nbr[u, t] = flat[k]
            k += 1
    return nbr


@njit(cache=True)
def _next_pair(i, j, m, triangle):
    if triangle:
        i += 1
        if i == j:
            j += 1
            i = 0
    else:
        j += 1
        if j == m:
            i += 1
            j = i + 1
    return i, j


@njit(cache=True)
def _pair_done(i, j, m):
    return i >= m - 1 or j >= m


@njit(cache=True)
def _build_variant(su, sv, i, j, variant, removed, added):
    a = su[i]
    b = sv[i]
    c = su[j]
    d = sv[j]
    removed[0, 0] = a
    removed[0, 1] = b
    removed[1, 0] = c
    removed[1, 1] = d
    if variant == 0:
        added[0, 0] = a
        added[0, 1] = c
        added[1, 0] = b
        added[1, 1] = d
    else:
        added[0, 0] = a
        added[0, 1] = d
        added[1, 0] = b
        added[1, 1] = c


@njit(cache=True)
def _bit(bits, u, v):
    return (bits[u, v >> 6] >> np.uint64(v & 63)) & ONE


@njit(cache=True)
def variant_valid(bits, a, b, c, d, variant):
    if a == c or a == d or b == c or b == d:
        return False
    if variant == 0:
        return _bit(bits, a, c) == 0 and _bit(bits, b, d) == 0
    return _bit(bits, a, d) == 0 and _bit(bits, b, c) == 0


@njit(cache=True)
def scan(bits, dist, pc, rowsum, ecc, su, sv, start_i, start_j, triangle,
         cur_diam, cur_total, budget, worse_after, worse_slack, removed, added, work, dirty):
    """Walk the pair sequence from (start_i, start_j) looking for an acceptable swap.

    A candidate is acceptable when it is lexicographically better in
    (diameter, total). Once more than `worse_after` evaluations have been spent
    (worse_after < 0 disables this), a candidate with equal diameter and
    total <= cur_total + worse_slack is acceptable too. When both variants of a
    pair qualify the better one wins.

    Returns (found, i, j, variant, diam, total, worse, evaluations, exhausted).
    """
    m = su.shape[0]
    i = start_i
    j = start_j
    evals = 0
    while not _pair_done(i, j, m):
        if evals >= budget:
            return False, i, j, -1, 0, np.int64(0), False, evals, False
        a = su[i]
        b = sv[i]
        c = su[j]
        d = sv[j]
        pick = -1
        pick_diam = 0
        pick_total = np.int64(0)
        pick_worse = False
        for variant in range(2):
            if not variant_valid(bits, a, b, c, d, variant):
                continue
            _build_variant(su, sv, i, j, variant, removed, added)
            worse_on = worse_after >= 0 and evals >= worse_after
            limit = cur_total + worse_slack if worse_on else cur_total - 1
            if pick >= 0:
                limit = min(limit, pick_total - 1)
            status, total, diam = evaluate_swap(
                bits, dist, pc, rowsum, ecc, removed, added, cur_diam, limit, work, dirty)
            evals += 1
            if status != SWAP_OK:
                continue
            better = diam < cur_diam or (diam == cur_diam and total < cur_total)
            worse_ok = worse_on and diam == cur_diam and total <= cur_total + worse_slack
            if not (better or worse_ok):
                continue
            if pick >= 0 and (diam > pick_diam or (diam == pick_diam and total >= pick_total)):
                continue
            pick = variant
            pick_diam = diam
            pick_total = total
            pick_worse = not better
        if pick >= 0:
            return True, i, j, pick, pick_diam, pick_total, pick_worse, evals, False
        i, j = _next_pair(i, j, m, triangle)
    return False, i, j, -1, 0, np.int64(0), False, evals, True
