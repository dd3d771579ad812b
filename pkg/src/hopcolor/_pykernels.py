"""Pure-Python implementations of the hot kernels.

Every function here has a twin with the same signature and semantics in
``_kernels.pyx``.  The compiled module is preferred when it can be imported;
this one is the fallback and the reference the compiled code is tested
against.  Graphs are passed as CSR arrays over node *indices* (0..n-1).
"""

from collections import deque

import numpy as np

__all__ = [
    "bfs_dist",
    "ball_csr",
    "exact_color",
    "lattice_search",
    "serena_rounds",
]


def bfs_dist(indptr, indices, src, limit):
    """Hop distances from ``src``; -1 for unreachable or beyond ``limit``.

    A negative ``limit`` means unbounded.
    """
    n = len(indptr) - 1
    dist = np.full(n, -1, dtype=np.int32)
    dist[src] = 0
    queue = deque([src])
    while queue:
        u = queue.popleft()
        du = dist[u]
        if 0 <= limit <= du:
            continue
        for k in range(indptr[u], indptr[u + 1]):
            v = indices[k]
            if dist[v] < 0:
                dist[v] = du + 1
                queue.append(v)
    return dist


def ball_csr(indptr, indices, h):
    """CSR of the h-th power graph, with the hop distance of every entry.

    Row ``u`` lists every node at hop distance 1..h from ``u`` in ascending
    index order; ``pdist`` holds the matching distances.
    """
    n = len(indptr) - 1
    out_ptr = np.zeros(n + 1, dtype=np.int64)
    rows = []
    dists = []
    mark = [-1] * n
    for s in range(n):
        level = {s: 0}
        frontier = [s]
        mark[s] = s
        found = []
        d = 0
        while frontier and d < h:
            d += 1
            nxt = []
            for u in frontier:
                for k in range(indptr[u], indptr[u + 1]):
                    v = int(indices[k])
                    if mark[v] != s:
                        mark[v] = s
                        level[v] = d
                        nxt.append(v)
                        found.append(v)
            frontier = nxt
        found.sort()
        rows.append(found)
        dists.append([level[v] for v in found])
        out_ptr[s + 1] = out_ptr[s] + len(found)
    flat = np.fromiter((v for r in rows for v in r), dtype=np.int32, count=int(out_ptr[-1]))
    flat_d = np.fromiter((x for r in dists for x in r), dtype=np.int32, count=int(out_ptr[-1]))
    return out_ptr, flat, flat_d


def exact_color(indptr, indices, lower, upper_colors):
    """Minimum proper coloring by backtracking.

    Nodes are branched in index order, colors tried ascending, and a node may
    open at most one new color (so node 0 always takes color 0).  The search
    starts from the coloring ``upper_colors`` and stops early once it reaches
    ``lower``.  Returns ``(k, colors)``.
    """
    n = len(indptr) - 1
    best_colors = np.asarray(upper_colors, dtype=np.int32).copy()
    if n == 0:
        return 0, best_colors
    best = int(best_colors.max()) + 1
    if best <= lower:
        return best, best_colors

    colors = [-1] * n
    next_try = [0] * (n + 1)
    used = [0] * (n + 1)
    i = 0
    while i >= 0:
        if i == n:
            best = used[n]
            best_colors = np.array(colors, dtype=np.int32)
            if best <= lower:
                break
            i -= 1
            continue
        c = next_try[i]
        top = min(used[i], best - 2)
        placed = False
        while c <= top:
            ok = True
            for k in range(indptr[i], indptr[i + 1]):
                j = indices[k]
                if j < i and colors[j] == c:
                    ok = False
                    break
            if ok:
                placed = True
                break
            c += 1
        if placed:
            colors[i] = c
            next_try[i] = c + 1
            used[i + 1] = max(used[i], c + 1)
            i += 1
            if i <= n:
                next_try[i] = 0
        else:
            colors[i] = -1
            i -= 1
    return best, best_colors


def lattice_search(cx, cy, near_x, near_y, bound):
    """Smallest-determinant admissible pair among candidate endpoints.

    A pair (i, j) is admissible when no point of ``near`` lies on the lattice
    spanned by the two candidates.  Only determinants strictly below
    ``bound`` are considered.  Iteration is over ``i`` then ``j`` in the given
    order and only strict improvements are kept, so among pairs with the
    minimal determinant the first one in iteration order wins.

    Returns ``(det, i, j)``, or ``(0, -1, -1)`` if nothing beats ``bound``.
    """
    cx = np.asarray(cx, dtype=np.int64)
    cy = np.asarray(cy, dtype=np.int64)
    nx = np.asarray(near_x, dtype=np.int64)
    ny = np.asarray(near_y, dtype=np.int64)
    best = int(bound)
    bi = bj = -1
    m = len(cx)
    for i in range(m):
        x1 = int(cx[i])
        y1 = int(cy[i])
        dets = np.abs(x1 * cy - y1 * cx)
        (js,) = np.nonzero((dets > 0) & (dets < best))
        if len(js) == 0:
            continue
        c1 = nx * y1 - ny * x1
        for j in js:
            d = int(dets[j])
            if d >= best:
                continue
            x2 = int(cx[j])
            y2 = int(cy[j])
            on1 = (c1 % d) == 0
            if on1.any():
                c2 = nx[on1] * y2 - ny[on1] * x2
                if ((c2 % d) == 0).any():
                    continue
            best = d
            bi, bj = i, int(j)
    if bi < 0:
        return 0, -1, -1
    return best, bi, bj


def _push2(a, b, e):
    if e == a or e == b:
        return a, b
    if e < a:
        return e, a
    if e < b:
        return a, e
    return a, b


def _pad_certain(c, tau, ta):
    """Top-2 when fewer than two entries rank at or above ``tau``.

    ``tau`` is the best lower entry among full source lists; nodes those
    lists truncated rank below it and are unknown.  The result is padded
    with the source's own entries so that it stays full, which tells the
    receiver that more may exist below.
    """
    if c < tau:
        return c, tau
    return ta, tau


def serena_rounds(indptr, indices, rank, max_rounds, nwords, guarded=1):
    """Synchronous optimized SERENA on a CSR topology.

    ``rank[u]`` is u's position in the priority order (0 is the highest).
    Priorities travel as ranks; ``n`` is the empty-slot sentinel.  Returns
    ``(color, colored_at, rounds, quiescent, status)`` where ``status`` is 0
    on success and 1 when ``max_rounds`` was hit before every node colored.
    ``nwords`` sizes the compiled bitmaps and is unused here.

    With ``guarded`` set, a received full top-2 list whose entries are all
    known to be colored still contributes its lower entry, because the
    nodes it truncated away are unknown and may outrank the receiver.
    """
    n = len(rank)
    rank = [int(r) for r in rank]
    ptr = [int(p) for p in indptr]
    nbr = [int(v) for v in indices]
    E = n

    color = [-1] * n
    m1a = [E] * n
    m1b = [E] * n
    m2a = [E] * n
    m2b = [E] * n
    m3 = [E] * n
    bm1 = [0] * n
    bm2 = [0] * n
    bm3 = [0] * n

    # last broadcast (what neighbors hold in their cache) and the one before
    s_color = [-1] * n
    s_m1a = [E] * n
    s_m1b = [E] * n
    s_m2a = [E] * n
    s_m2b = [E] * n
    s_bm1 = [0] * n
    s_bm2 = [0] * n
    p_m1a = [E] * n
    p_m1b = [E] * n
    terminated = [False] * n

    def broadcast():
        for u in range(n):
            p_m1a[u] = s_m1a[u]
            p_m1b[u] = s_m1b[u]
            if terminated[u]:
                continue
            s_color[u] = color[u]
            s_m1a[u] = m1a[u]
            s_m1b[u] = m1b[u]
            s_m2a[u] = m2a[u]
            s_m2b[u] = m2b[u]
            s_bm1[u] = bm1[u]
            s_bm2[u] = bm2[u]
            if color[u] >= 0 and m1a[u] == E and m2a[u] == E and m3[u] == E:
                terminated[u] = True

    def update(v):
        known = [rank[v]] if color[v] >= 0 else []
        a = b = E
        b1 = b2 = b3 = 0
        lo, hi = ptr[v], ptr[v + 1]
        for k in range(lo, hi):
            x = nbr[k]
            cx = s_color[x]
            if cx >= 0:
                known.append(rank[x])
                b1 |= 1 << cx
            else:
                a, b = _push2(a, b, rank[x])
            for e in (p_m1a[x], p_m1b[x]):
                if e != E and e != s_m1a[x] and e != s_m1b[x]:
                    known.append(e)
            b2 |= s_bm1[x]
            b3 |= s_bm2[x]
        c = d = E
        t3 = E
        tau = ta = E
        for k in range(lo, hi):
            x = nbr[k]
            ea, eb = s_m1a[x], s_m1b[x]
            if ea != E and ea not in known:
                c, d = _push2(c, d, ea)
            if eb != E:
                if eb not in known:
                    c, d = _push2(c, d, eb)
                if eb < tau or (eb == tau and ea < ta):
                    tau, ta = eb, ea
            ea, eb = s_m2a[x], s_m2b[x]
            if ea < t3 and ea not in known:
                t3 = ea
            if eb < t3 and (guarded or eb not in known):
                # a full list's lower entry bounds what it truncated
                t3 = eb
        if guarded and tau != E and d > tau:
            c, d = _pad_certain(c, tau, ta)
        m1a[v], m1b[v] = a, b
        m2a[v], m2b[v] = c, d
        m3[v] = t3
        bm1[v], bm2[v], bm3[v] = b1, b2, b3

    # initialization exchanges: lists settle on the all-uncolored fixed point
    for _ in range(3):
        broadcast()
        for v in range(n):
            update(v)

    colored_at = [0] * n
    remaining = n
    rounds = 0
    r = 0
    status = 0
    while remaining > 0:
        if r >= max_rounds:
            status = 1
            break
        r += 1
        broadcast()
        for v in range(n):
            if not terminated[v]:
                update(v)
        newly = []
        for v in range(n):
            if color[v] >= 0:
                continue
            top = min(m1a[v], m2a[v], m3[v])
            if top >= rank[v]:
                newly.append(v)
        for v in newly:
            forbidden = bm1[v] | bm2[v] | bm3[v]
            c = 0
            while (forbidden >> c) & 1:
                c += 1
            color[v] = c
            colored_at[v] = r
        remaining -= len(newly)
        if newly:
            rounds = r

    quiescent = r
    if status == 0:
        settle = r + 16
        while not all(terminated) and r < settle:
            r += 1
            broadcast()
            for v in range(n):
                if not terminated[v]:
                    update(v)
        quiescent = r
    return (
        np.array(color, dtype=np.int32),
        np.array(colored_at, dtype=np.int32),
        rounds,
        quiescent,
        status,
    )
