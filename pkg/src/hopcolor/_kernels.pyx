# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels.  Semantics match ``_pykernels`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int32_t, int64_t, uint64_t

cnp.import_array()


def bfs_dist(const int64_t[::1] indptr, const int32_t[::1] indices, Py_ssize_t src, int limit):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    dist_arr = np.full(n, -1, dtype=np.int32)
    cdef int32_t[::1] dist = dist_arr
    cdef int32_t[::1] queue = np.empty(max(n, 1), dtype=np.int32)
    cdef Py_ssize_t head = 0, tail = 0, k, u, v
    dist[src] = 0
    queue[tail] = <int32_t>src
    tail += 1
    while head < tail:
        u = queue[head]
        head += 1
        if limit >= 0 and dist[u] >= limit:
            continue
        for k in range(indptr[u], indptr[u + 1]):
            v = indices[k]
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue[tail] = <int32_t>v
                tail += 1
    return dist_arr


def ball_csr(const int64_t[::1] indptr, const int32_t[::1] indices, int h):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef int32_t[::1] mark = np.full(max(n, 1), -1, dtype=np.int32)
    cdef int32_t[::1] level = np.zeros(max(n, 1), dtype=np.int32)
    cdef int32_t[::1] queue = np.empty(max(n, 1), dtype=np.int32)
    out_ptr_arr = np.zeros(n + 1, dtype=np.int64)
    cdef int64_t[::1] out_ptr = out_ptr_arr
    cdef Py_ssize_t s, head, tail, k, u, v, total = 0
    # first pass: sizes
    for s in range(n):
        head = 0
        tail = 0
        mark[s] = <int32_t>s
        level[s] = 0
        queue[tail] = <int32_t>s
        tail += 1
        while head < tail:
            u = queue[head]
            head += 1
            if level[u] >= h:
                continue
            for k in range(indptr[u], indptr[u + 1]):
                v = indices[k]
                if mark[v] != s:
                    mark[v] = <int32_t>s
                    level[v] = level[u] + 1
                    queue[tail] = <int32_t>v
                    tail += 1
        total += tail - 1
        out_ptr[s + 1] = total
    flat_arr = np.empty(total, dtype=np.int32)
    dist_arr = np.empty(total, dtype=np.int32)
    cdef int32_t[::1] flat = flat_arr
    cdef int32_t[::1] fdist = dist_arr
    mark[:] = -1
    cdef Py_ssize_t base
    for s in range(n):
        head = 0
        tail = 0
        mark[s] = <int32_t>s
        level[s] = 0
        queue[tail] = <int32_t>s
        tail += 1
        while head < tail:
            u = queue[head]
            head += 1
            if level[u] >= h:
                continue
            for k in range(indptr[u], indptr[u + 1]):
                v = indices[k]
                if mark[v] != s:
                    mark[v] = <int32_t>s
                    level[v] = level[u] + 1
                    queue[tail] = <int32_t>v
                    tail += 1
        base = out_ptr[s]
        for k in range(1, tail):
            flat[base + k - 1] = queue[k]
        # rows sorted by index
        row = flat_arr[base:out_ptr[s + 1]]
        row.sort()
        for k in range(out_ptr[s], out_ptr[s + 1]):
            fdist[k] = level[flat[k]]
    return out_ptr_arr, flat_arr, dist_arr


def exact_color(const int64_t[::1] indptr, const int32_t[::1] indices, int lower, upper_colors):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    best_arr = np.asarray(upper_colors, dtype=np.int32).copy()
    if n == 0:
        return 0, best_arr
    cdef int best = int(best_arr.max()) + 1
    if best <= lower:
        return best, best_arr
    cdef int32_t[::1] colors = np.full(n, -1, dtype=np.int32)
    cdef int32_t[::1] next_try = np.zeros(n + 1, dtype=np.int32)
    cdef int32_t[::1] used = np.zeros(n + 1, dtype=np.int32)
    cdef Py_ssize_t i = 0, k, j
    cdef int c, top
    cdef bint ok, placed
    while i >= 0:
        if i == n:
            best = used[n]
            best_arr = np.asarray(colors).copy()
            if best <= lower:
                break
            i -= 1
            continue
        c = next_try[i]
        top = used[i] if used[i] < best - 2 else best - 2
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
            used[i + 1] = used[i] if used[i] > c + 1 else c + 1
            i += 1
            next_try[i] = 0
        else:
            colors[i] = -1
            i -= 1
    return best, best_arr


def lattice_search(cx_in, cy_in, nx_in, ny_in, int64_t bound):
    cdef int64_t[::1] cx = np.ascontiguousarray(cx_in, dtype=np.int64)
    cdef int64_t[::1] cy = np.ascontiguousarray(cy_in, dtype=np.int64)
    cdef int64_t[::1] nx = np.ascontiguousarray(nx_in, dtype=np.int64)
    cdef int64_t[::1] ny = np.ascontiguousarray(ny_in, dtype=np.int64)
    cdef Py_ssize_t m = cx.shape[0], q = nx.shape[0], i, j, p
    cdef int64_t best = bound, d, x1, y1, x2, y2, a, b
    cdef Py_ssize_t bi = -1, bj = -1
    cdef bint admissible
    for i in range(m):
        x1 = cx[i]
        y1 = cy[i]
        for j in range(m):
            x2 = cx[j]
            y2 = cy[j]
            d = x1 * y2 - y1 * x2
            if d < 0:
                d = -d
            if d == 0 or d >= best:
                continue
            admissible = True
            for p in range(q):
                a = (nx[p] * y1 - ny[p] * x1) % d
                if a != 0:
                    continue
                b = (nx[p] * y2 - ny[p] * x2) % d
                if b == 0:
                    admissible = False
                    break
            if admissible:
                best = d
                bi = i
                bj = j
    if bi < 0:
        return 0, -1, -1
    return int(best), int(bi), int(bj)


cdef inline void _push2(int32_t* a, int32_t* b, int32_t e) noexcept nogil:
    if e == a[0] or e == b[0]:
        return
    if e < a[0]:
        b[0] = a[0]
        a[0] = e
    elif e < b[0]:
        b[0] = e


cdef inline bint _in(int32_t* buf, Py_ssize_t m, int32_t e) noexcept nogil:
    cdef Py_ssize_t k
    for k in range(m):
        if buf[k] == e:
            return True
    return False


cdef struct _State:
    Py_ssize_t n
    Py_ssize_t W
    int32_t E
    const int64_t* ptr
    const int32_t* nbr
    int32_t* rank
    int32_t* color
    int32_t* m1a
    int32_t* m1b
    int32_t* m2a
    int32_t* m2b
    int32_t* m3
    uint64_t* bm1
    uint64_t* bm2
    uint64_t* bm3
    int32_t* s_color
    int32_t* s_m1a
    int32_t* s_m1b
    int32_t* s_m2a
    int32_t* s_m2b
    uint64_t* s_bm1
    uint64_t* s_bm2
    int32_t* p_m1a
    int32_t* p_m1b
    unsigned char* terminated
    int32_t* known
    bint guarded


cdef void _broadcast(_State* S) noexcept nogil:
    cdef Py_ssize_t u, w, W = S.W
    cdef int32_t E = S.E
    for u in range(S.n):
        S.p_m1a[u] = S.s_m1a[u]
        S.p_m1b[u] = S.s_m1b[u]
        if S.terminated[u]:
            continue
        S.s_color[u] = S.color[u]
        S.s_m1a[u] = S.m1a[u]
        S.s_m1b[u] = S.m1b[u]
        S.s_m2a[u] = S.m2a[u]
        S.s_m2b[u] = S.m2b[u]
        for w in range(W):
            S.s_bm1[u * W + w] = S.bm1[u * W + w]
            S.s_bm2[u * W + w] = S.bm2[u * W + w]
        if S.color[u] >= 0 and S.m1a[u] == E and S.m2a[u] == E and S.m3[u] == E:
            S.terminated[u] = 1


cdef void _update(_State* S, Py_ssize_t v) noexcept nogil:
    cdef Py_ssize_t W = S.W, k, x, w, nk = 0
    cdef Py_ssize_t lo = S.ptr[v], hi = S.ptr[v + 1]
    cdef int32_t E = S.E, a = S.E, b = S.E, c = S.E, d = S.E, t3 = S.E, e, cx, ea, eb, tau = S.E, ta = S.E
    cdef int32_t* known = S.known
    if S.color[v] >= 0:
        known[nk] = S.rank[v]
        nk += 1
    for w in range(W):
        S.bm1[v * W + w] = 0
        S.bm2[v * W + w] = 0
        S.bm3[v * W + w] = 0
    for k in range(lo, hi):
        x = S.nbr[k]
        cx = S.s_color[x]
        if cx >= 0:
            known[nk] = S.rank[x]
            nk += 1
            S.bm1[v * W + (cx >> 6)] |= (<uint64_t>1) << (cx & 63)
        else:
            _push2(&a, &b, S.rank[x])
        # an entry that left a neighbor's top-2 can only have colored
        e = S.p_m1a[x]
        if e != E and e != S.s_m1a[x] and e != S.s_m1b[x]:
            known[nk] = e
            nk += 1
        e = S.p_m1b[x]
        if e != E and e != S.s_m1a[x] and e != S.s_m1b[x]:
            known[nk] = e
            nk += 1
        for w in range(W):
            S.bm2[v * W + w] |= S.s_bm1[x * W + w]
            S.bm3[v * W + w] |= S.s_bm2[x * W + w]
    for k in range(lo, hi):
        x = S.nbr[k]
        ea = S.s_m1a[x]
        eb = S.s_m1b[x]
        if ea != E and not _in(known, nk, ea):
            _push2(&c, &d, ea)
        if eb != E:
            if not _in(known, nk, eb):
                _push2(&c, &d, eb)
            if eb < tau or (eb == tau and ea < ta):
                tau = eb
                ta = ea
        ea = S.s_m2a[x]
        eb = S.s_m2b[x]
        if ea < t3 and not _in(known, nk, ea):
            t3 = ea
        if eb < t3 and (S.guarded or not _in(known, nk, eb)):
            # a full list's lower entry bounds what it truncated
            t3 = eb
    if S.guarded and tau != E and d > tau:
        # fewer than two certain entries: pad with the truncating list itself
        if c < tau:
            d = tau
        else:
            c = ta
            d = tau
    S.m1a[v] = a
    S.m1b[v] = b
    S.m2a[v] = c
    S.m2b[v] = d
    S.m3[v] = t3


cdef void _exchange(_State* S) noexcept nogil:
    cdef Py_ssize_t v
    _broadcast(S)
    for v in range(S.n):
        if not S.terminated[v]:
            _update(S, v)


def serena_rounds(const int64_t[::1] indptr, const int32_t[::1] indices, rank_in, int max_rounds, int nwords, int guarded=1):
    cdef Py_ssize_t n = len(rank_in)
    cdef Py_ssize_t W = nwords if nwords > 0 else 1
    cdef int32_t E = <int32_t>n
    cdef Py_ssize_t size = n if n > 0 else 1

    rank_arr = np.ascontiguousarray(rank_in, dtype=np.int32)
    color_arr = np.full(size, -1, dtype=np.int32)
    colored_arr = np.zeros(size, dtype=np.int32)
    lists = np.full((11, size), E, dtype=np.int32)
    bitmaps = np.zeros((5, size * W), dtype=np.uint64)
    s_color_arr = np.full(size, -1, dtype=np.int32)
    term_arr = np.zeros(size, dtype=np.uint8)
    newly_arr = np.empty(size, dtype=np.int32)

    cdef int32_t[::1] rank = rank_arr
    cdef int32_t[::1] color = color_arr
    cdef int32_t[::1] colored_at = colored_arr
    cdef int32_t[:, ::1] L = lists
    cdef uint64_t[:, ::1] B = bitmaps
    cdef int32_t[::1] s_color = s_color_arr
    cdef unsigned char[::1] terminated = term_arr
    cdef int32_t[::1] newly = newly_arr

    cdef Py_ssize_t maxdeg = 0, u
    for u in range(n):
        if indptr[u + 1] - indptr[u] > maxdeg:
            maxdeg = indptr[u + 1] - indptr[u]
    known_arr = np.empty(3 * maxdeg + 2, dtype=np.int32)
    cdef int32_t[::1] known = known_arr

    cdef _State S
    S.n = n
    S.W = W
    S.E = E
    S.ptr = &indptr[0]
    S.nbr = &indices[0] if indices.shape[0] > 0 else NULL
    S.rank = &rank[0] if n > 0 else NULL
    S.color = &color[0]
    S.m1a = &L[0, 0]
    S.m1b = &L[1, 0]
    S.m2a = &L[2, 0]
    S.m2b = &L[3, 0]
    S.m3 = &L[4, 0]
    S.s_m1a = &L[5, 0]
    S.s_m1b = &L[6, 0]
    S.s_m2a = &L[7, 0]
    S.s_m2b = &L[8, 0]
    S.p_m1a = &L[9, 0]
    S.p_m1b = &L[10, 0]
    S.bm1 = &B[0, 0]
    S.bm2 = &B[1, 0]
    S.bm3 = &B[2, 0]
    S.s_bm1 = &B[3, 0]
    S.s_bm2 = &B[4, 0]
    S.s_color = &s_color[0]
    S.terminated = &terminated[0]
    S.known = &known[0]
    S.guarded = guarded != 0

    cdef Py_ssize_t remaining = n, nnew, k, v, w
    cdef int r = 0, rounds = 0, status = 0, settle, col, i
    cdef uint64_t word
    cdef bint all_done

    with nogil:
        # initialization exchanges: lists settle on the all-uncolored fixed point
        for i in range(3):
            _exchange(&S)
        while remaining > 0:
            if r >= max_rounds:
                status = 1
                break
            r += 1
            _exchange(&S)
            nnew = 0
            for v in range(n):
                if color[v] >= 0:
                    continue
                if S.m1a[v] >= rank[v] and S.m2a[v] >= rank[v] and S.m3[v] >= rank[v]:
                    newly[nnew] = <int32_t>v
                    nnew += 1
            for k in range(nnew):
                v = newly[k]
                col = 0
                for w in range(W):
                    word = S.bm1[v * W + w] | S.bm2[v * W + w] | S.bm3[v * W + w]
                    if word != <uint64_t>0xFFFFFFFFFFFFFFFF:
                        while (word >> (col & 63)) & 1:
                            col += 1
                        break
                    col += 64
                color[v] = col
                colored_at[v] = r
            remaining -= nnew
            if nnew > 0:
                rounds = r
        if status == 0:
            settle = r + 16
            while r < settle:
                all_done = True
                for u in range(n):
                    if not terminated[u]:
                        all_done = False
                        break
                if all_done:
                    break
                r += 1
                _exchange(&S)
    return color_arr[:n].copy(), colored_arr[:n].copy(), rounds, r, status
