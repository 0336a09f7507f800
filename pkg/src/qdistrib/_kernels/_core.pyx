# cython: language_level=3
"""Compiled kernels.  Semantics match ``_fallback.py`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, calloc, free
from libc.string cimport memcmp, memcpy, memset

cnp.import_array()

ctypedef cnp.int64_t i64
ctypedef cnp.uint64_t u64

cdef i64 INF = 2305843009213693951  # iinfo(int64).max // 4


# ---------------------------------------------------------------------------
# tabu search

cdef i64 _assign_cost(Py_ssize_t G, Py_ssize_t P, const i64* W, const i64* A,
                      const i64* D, const i64* a) noexcept nogil:
    cdef i64 s = 0
    cdef Py_ssize_t g, h
    for g in range(G):
        for h in range(g + 1, G):
            s += W[g * G + h] * D[a[g] * P + a[h]]
        s += A[g * P + a[g]]
    return s


cdef inline void _apply_move(Py_ssize_t G, Py_ssize_t P, i64* C, const i64* W,
                             const i64* D, i64* load, const i64* sizes, i64* a,
                             Py_ssize_t g, i64 p) noexcept nogil:
    cdef i64 old = a[g]
    cdef Py_ssize_t x, q
    cdef i64 w
    for x in range(G):
        w = W[x * G + g]
        if w != 0:
            for q in range(P):
                C[x * P + q] += w * (D[q * P + p] - D[q * P + old])
    load[old] -= sizes[g]
    load[p] += sizes[g]
    a[g] = p


cdef inline bint _is_tabu(const u64* ring, Py_ssize_t n, u64 h) noexcept nogil:
    cdef Py_ssize_t t
    for t in range(n):
        if ring[t] == h:
            return 1
    return 0


cdef i64 _tabu(Py_ssize_t G, Py_ssize_t P, const i64* sizes, const i64* W,
               const i64* A, const i64* D, const i64* caps, i64* best_a,
               Py_ssize_t iters, Py_ssize_t tabu_len, const u64* zob) noexcept nogil:
    """Tabu search from ``best_a``; overwrites it with the best assignment.

    The winner is the non-tabu neighbour with the smallest (delta, scan index),
    moves (g, p) scanned before swaps (g, k).  Swaps are visited grouped by the
    partner's computer and whole blocks are skipped when a lower bound on their
    delta already exceeds the best delta; this does not change the winner.
    """
    cdef i64 cost = _assign_cost(G, P, W, A, D, best_a)
    cdef i64 best = cost
    if G == 0 or P <= 1 or iters <= 0:
        return best
    cdef i64* a = <i64*> malloc(G * sizeof(i64))
    cdef i64* load = <i64*> calloc(P, sizeof(i64))
    cdef i64* C = <i64*> calloc(G * P, sizeof(i64))
    cdef i64* M = <i64*> malloc(G * P * sizeof(i64))
    cdef i64* mk = <i64*> malloc(P * P * sizeof(i64))
    cdef Py_ssize_t* members = <Py_ssize_t*> malloc(G * sizeof(Py_ssize_t))
    cdef Py_ssize_t* mstart = <Py_ssize_t*> malloc((P + 1) * sizeof(Py_ssize_t))
    cdef Py_ssize_t* mfill = <Py_ssize_t*> malloc((P + 1) * sizeof(Py_ssize_t))
    cdef u64* ring = <u64*> malloc((tabu_len + 1) * sizeof(u64))
    cdef Py_ssize_t g, k, p, y, m, it, n_tabu = 0, head = 0
    cdef i64 ag, ak, d, best_d, base_c, sg
    cdef u64 h = 0, nh, best_h = 0
    cdef int found, kind = 0
    cdef Py_ssize_t bg = 0, bk = 0
    memcpy(a, best_a, G * sizeof(i64))
    for g in range(G):
        load[a[g]] += sizes[g]
        h ^= zob[g * P + a[g]]
    for g in range(G):
        for k in range(G):
            if W[g * G + k]:
                for p in range(P):
                    C[g * P + p] += W[g * G + k] * D[p * P + a[k]]
    if tabu_len > 0:
        ring[0] = h
        n_tabu = 1
        head = 1 % tabu_len
    for it in range(iters):
        found = 0
        best_d = 0
        # move deltas, and the cheapest move onto each computer per block
        for p in range(P * P):
            mk[p] = INF
        for p in range(P + 1):
            mstart[p] = 0
        for g in range(G):
            ag = a[g]
            mstart[ag + 1] += 1
            base_c = C[g * P + ag] + A[g * P + ag]
            for p in range(P):
                d = C[g * P + p] + A[g * P + p] - base_c
                M[g * P + p] = d
                if d < mk[ag * P + p]:
                    mk[ag * P + p] = d
                if p == ag or load[p] + sizes[g] > caps[p]:
                    continue
                if not found or d < best_d:
                    nh = h ^ zob[g * P + ag] ^ zob[g * P + p]
                    if _is_tabu(ring, n_tabu, nh):
                        continue
                    found = 1
                    best_d = d
                    best_h = nh
                    kind = 0
                    bg = g
                    bk = p
        for p in range(P):
            mstart[p + 1] += mstart[p]
            mfill[p] = mstart[p]
        for g in range(G):
            members[mfill[a[g]]] = g
            mfill[a[g]] += 1
        for g in range(G):
            ag = a[g]
            sg = sizes[g]
            for y in range(P):
                if y == ag:
                    continue
                if found and M[g * P + y] + mk[y * P + ag] > best_d:
                    continue
                for m in range(mstart[y], mstart[y + 1]):
                    k = members[m]
                    if k <= g:
                        continue
                    ak = y
                    d = M[g * P + ak] + M[k * P + ag]
                    if found and d > best_d:
                        continue
                    if load[ag] - sg + sizes[k] > caps[ag]:
                        continue
                    if load[ak] - sizes[k] + sg > caps[ak]:
                        continue
                    d += 2 * W[g * G + k] * D[ag * P + ak]
                    if not found or d < best_d or (
                        d == best_d and kind == 1 and g == bg and k < bk
                    ):
                        nh = h ^ zob[g * P + ag] ^ zob[g * P + ak] ^ zob[k * P + ak] ^ zob[k * P + ag]
                        if _is_tabu(ring, n_tabu, nh):
                            continue
                        found = 1
                        best_d = d
                        best_h = nh
                        kind = 1
                        bg = g
                        bk = k
        if not found:
            break
        cost += best_d
        if kind == 0:
            _apply_move(G, P, C, W, D, load, sizes, a, bg, bk)
        else:
            ag = a[bg]
            ak = a[bk]
            _apply_move(G, P, C, W, D, load, sizes, a, bg, ak)
            _apply_move(G, P, C, W, D, load, sizes, a, bk, ag)
        h = best_h
        if tabu_len > 0:
            ring[head] = h
            head = (head + 1) % tabu_len
            if n_tabu < tabu_len:
                n_tabu += 1
        if cost < best:
            best = cost
            memcpy(best_a, a, G * sizeof(i64))
    free(a)
    free(load)
    free(C)
    free(M)
    free(mk)
    free(members)
    free(mstart)
    free(mfill)
    free(ring)
    return best


def assignment_cost(W, A, D, assign):
    cdef const i64[:, ::1] Wv = np.ascontiguousarray(W, dtype=np.int64)
    cdef const i64[:, ::1] Av = np.ascontiguousarray(A, dtype=np.int64)
    cdef const i64[:, ::1] Dv = np.ascontiguousarray(D, dtype=np.int64)
    cdef const i64[::1] av = np.ascontiguousarray(assign, dtype=np.int64)
    cdef Py_ssize_t G = Av.shape[0], P = Dv.shape[0]
    if G == 0:
        return 0
    return int(_assign_cost(G, P, &Wv[0, 0], &Av[0, 0], &Dv[0, 0], &av[0]))


def tabu_kernel(sizes, W, A, D, caps, assign0, Py_ssize_t iters, Py_ssize_t tabu_len, zob):
    cdef const i64[::1] sz = np.ascontiguousarray(sizes, dtype=np.int64)
    cdef const i64[:, ::1] Wv = np.ascontiguousarray(W, dtype=np.int64)
    cdef const i64[:, ::1] Av = np.ascontiguousarray(A, dtype=np.int64)
    cdef const i64[:, ::1] Dv = np.ascontiguousarray(D, dtype=np.int64)
    cdef const i64[::1] cv = np.ascontiguousarray(caps, dtype=np.int64)
    cdef const u64[:, ::1] zv = np.ascontiguousarray(zob, dtype=np.uint64)
    out = np.array(assign0, dtype=np.int64)
    cdef i64[::1] ov = out
    cdef Py_ssize_t G = Av.shape[0], P = Dv.shape[0]
    cdef i64 best
    if G == 0:
        return out, 0
    with nogil:
        best = _tabu(G, P, &sz[0], &Wv[0, 0], &Av[0, 0], &Dv[0, 0], &cv[0], &ov[0],
                     iters, tabu_len, &zv[0, 0])
    return out, int(best)


# ---------------------------------------------------------------------------
# assignment problem

cdef void _hungarian(Py_ssize_t n, const i64* cost, i64* out) noexcept nogil:
    cdef i64* u = <i64*> calloc(n + 1, sizeof(i64))
    cdef i64* v = <i64*> calloc(n + 1, sizeof(i64))
    cdef Py_ssize_t* p = <Py_ssize_t*> calloc(n + 1, sizeof(Py_ssize_t))
    cdef Py_ssize_t* way = <Py_ssize_t*> calloc(n + 1, sizeof(Py_ssize_t))
    cdef i64* minv = <i64*> malloc((n + 1) * sizeof(i64))
    cdef char* used = <char*> malloc(n + 1)
    cdef Py_ssize_t i, j, i0, j0, j1
    cdef i64 delta, cur
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        for j in range(n + 1):
            minv[j] = INF
            used[j] = 0
        while True:
            used[j0] = 1
            i0 = p[j0]
            delta = INF
            j1 = 0
            for j in range(1, n + 1):
                if not used[j]:
                    cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    for j in range(1, n + 1):
        out[p[j] - 1] = j - 1
    free(u)
    free(v)
    free(p)
    free(way)
    free(minv)
    free(used)


cdef void _relabel(Py_ssize_t nq, Py_ssize_t P, const i64* prev, i64* new,
                   const i64* D) noexcept nogil:
    cdef i64* M = <i64*> calloc(P * P, sizeof(i64))
    cdef i64* perm = <i64*> malloc(P * sizeof(i64))
    cdef Py_ssize_t q, j, p
    for q in range(nq):
        j = new[q]
        for p in range(P):
            M[j * P + p] += D[prev[q] * P + p]
    for j in range(P):
        for p in range(P):
            M[j * P + p] = M[j * P + p] * (P + 1) + (0 if j == p else 1)
    _hungarian(P, M, perm)
    for q in range(nq):
        new[q] = perm[new[q]]
    free(M)
    free(perm)


def hungarian(cost):
    cdef const i64[:, ::1] cv = np.ascontiguousarray(cost, dtype=np.int64)
    cdef Py_ssize_t n = cv.shape[0]
    out = np.empty(n, dtype=np.int64)
    cdef i64[::1] ov = out
    if n:
        _hungarian(n, &cv[0, 0], &ov[0])
    return out


def relabel_home(prev, new, D):
    cdef const i64[::1] pv = np.ascontiguousarray(prev, dtype=np.int64)
    cdef const i64[:, ::1] Dv = np.ascontiguousarray(D, dtype=np.int64)
    out = np.array(new, dtype=np.int64)
    cdef i64[::1] ov = out
    if len(out):
        _relabel(len(out), Dv.shape[0], &pv[0], &ov[0], &Dv[0, 0])
    return out


# ---------------------------------------------------------------------------
# zero-cost sub-circuit table

cdef inline Py_ssize_t _find(Py_ssize_t* parent, Py_ssize_t x) noexcept nogil:
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


cdef Py_ssize_t _labels(Py_ssize_t nq, Py_ssize_t* parent, Py_ssize_t* rootlab,
                        i64* lab) noexcept nogil:
    cdef Py_ssize_t q, r, n = 0
    for q in range(nq):
        rootlab[q] = -1
    for q in range(nq):
        r = _find(parent, q)
        if rootlab[r] < 0:
            rootlab[r] = n
            n += 1
        lab[q] = rootlab[r]
    return n


cdef int _pack(Py_ssize_t nq, Py_ssize_t ncomp, const i64* lab, Py_ssize_t P,
               const i64* caps, bint ffd, i64* sizes, Py_ssize_t* order,
               i64* where, i64* load, i64* home) noexcept nogil:
    """First-fit (decreasing) packing; returns 0 when some component fails."""
    cdef Py_ssize_t c, q, p, m = 0, i, j, x
    cdef i64 s
    for c in range(ncomp):
        sizes[c] = 0
    for q in range(nq):
        sizes[lab[q]] += 1
    for c in range(ncomp):
        if sizes[c] > 1:
            order[m] = c
            m += 1
    if ffd:
        # stable insertion sort by decreasing size
        for i in range(1, m):
            x = order[i]
            j = i - 1
            while j >= 0 and sizes[order[j]] < sizes[x]:
                order[j + 1] = order[j]
                j -= 1
            order[j + 1] = x
    for p in range(P):
        load[p] = 0
    for i in range(m):
        c = order[i]
        s = sizes[c]
        for p in range(P):
            if load[p] + s <= caps[p]:
                load[p] += s
                where[c] = p
                break
        else:
            return 0
    p = 0
    for c in range(ncomp):
        if sizes[c] == 1:
            while p < P and load[p] + 1 > caps[p]:
                p += 1
            if p == P:
                return 0
            load[p] += 1
            where[c] = p
    for q in range(nq):
        home[q] = where[lab[q]]
    return 1


def zcsc_scan(pairs, Py_ssize_t nq, caps, bint ffd=True):
    cdef const i64[:, ::1] pv = np.ascontiguousarray(pairs, dtype=np.int64).reshape(-1, 2)
    cdef const i64[::1] cv = np.ascontiguousarray(caps, dtype=np.int64)
    cdef Py_ssize_t B = pv.shape[0], P = cv.shape[0]
    ends_arr = np.zeros(B, dtype=np.int64)
    base_arr = np.zeros(B + 1, dtype=np.int64)
    ffd_end_arr = np.zeros(B, dtype=np.int64)
    cdef i64[::1] ends = ends_arr, base = base_arr, ffd_end = ffd_end_arr
    cdef Py_ssize_t* parent = <Py_ssize_t*> malloc((nq + 1) * sizeof(Py_ssize_t))
    cdef Py_ssize_t* rootlab = <Py_ssize_t*> malloc((nq + 1) * sizeof(Py_ssize_t))
    cdef Py_ssize_t* order = <Py_ssize_t*> malloc((nq + 1) * sizeof(Py_ssize_t))
    cdef i64* sizes = <i64*> malloc((nq + 1) * sizeof(i64))
    cdef i64* where = <i64*> malloc((nq + 1) * sizeof(i64))
    cdef i64* load = <i64*> malloc((P + 1) * sizeof(i64))
    cdef i64* lab = <i64*> malloc((nq + 1) * sizeof(i64))
    cdef i64* home = <i64*> malloc((nq + 1) * sizeof(i64))
    cdef Py_ssize_t k, l, q, ra, rb, ncomp, prev_end = 0, total = 0
    cdef i64[:, ::1] homes
    cdef i64[:, ::1] labels
    cdef Py_ssize_t pid, ppid
    try:
        with nogil:
            # pass 1: extents
            for k in range(B):
                for q in range(nq):
                    parent[q] = q
                l = k
                while l < B:
                    ra = _find(parent, pv[l, 0])
                    rb = _find(parent, pv[l, 1])
                    if ra != rb:
                        if ra < rb:
                            parent[rb] = ra
                        else:
                            parent[ra] = rb
                    ncomp = _labels(nq, parent, rootlab, lab)
                    if not _pack(nq, ncomp, lab, P, &cv[0], ffd, sizes, order, where, load, home):
                        break
                    l += 1
                ffd_end[k] = l
                ends[k] = l if l > prev_end else prev_end
                if ends[k] < k:
                    ends[k] = k
                prev_end = ends[k]
                base[k + 1] = base[k] + ends[k] - k
            total = base[B]
        homes_arr = np.zeros((total, nq), dtype=np.int64)
        labels_arr = np.zeros((total, nq), dtype=np.int64)
        homes = homes_arr
        labels = labels_arr
        if total:
            with nogil:
                # pass 2: labels and homes
                for k in range(B):
                    for q in range(nq):
                        parent[q] = q
                    for l in range(k + 1, ends[k] + 1):
                        ra = _find(parent, pv[l - 1, 0])
                        rb = _find(parent, pv[l - 1, 1])
                        if ra != rb:
                            if ra < rb:
                                parent[rb] = ra
                            else:
                                parent[ra] = rb
                        pid = base[k] + l - k - 1
                        ncomp = _labels(nq, parent, rootlab, &labels[pid, 0])
                        if l <= ffd_end[k]:
                            _pack(nq, ncomp, &labels[pid, 0], P, &cv[0], ffd, sizes, order,
                                  where, load, &homes[pid, 0])
                        else:
                            ppid = base[k - 1] + l - k
                            memcpy(&homes[pid, 0], &homes[ppid, 0], nq * sizeof(i64))
    finally:
        free(parent)
        free(rootlab)
        free(order)
        free(sizes)
        free(where)
        free(load)
        free(lab)
        free(home)
    return ends_arr, base_arr, homes_arr, labels_arr


# ---------------------------------------------------------------------------
# division DPs

def _chain(const i64[::1] ends, const i64[::1] base, const i64[::1] back,
           const i64[::1] S, Py_ssize_t B):
    cdef i64 best = INF
    cdef Py_ssize_t i, j, arg = -1, pid
    for i in range(B):
        if ends[i] == B:
            pid = base[i] + B - i - 1
            if S[pid] < best:
                best = S[pid]
                arg = i
    if arg < 0:
        return INF, []
    bounds = [B]
    j = B
    i = arg
    while True:
        bounds.append(i)
        if i == 0:
            break
        pid = base[i] + j - i - 1
        j, i = i, back[pid]
    bounds.reverse()
    return int(best), bounds


def simple_dp(ends_in, base_in, homes_in, D_in, bint relabel):
    cdef const i64[::1] ends = np.ascontiguousarray(ends_in, dtype=np.int64)
    cdef const i64[::1] base = np.ascontiguousarray(base_in, dtype=np.int64)
    cdef const i64[:, ::1] homes = np.ascontiguousarray(homes_in, dtype=np.int64)
    cdef const i64[:, ::1] D = np.ascontiguousarray(D_in, dtype=np.int64)
    cdef Py_ssize_t B = ends.shape[0], P = D.shape[0]
    if B == 0:
        return 0, [0]
    cdef Py_ssize_t nq = homes.shape[1]
    cdef Py_ssize_t npieces = base[B]
    S_arr = np.full(npieces, INF, dtype=np.int64)
    back_arr = np.full(npieces, -1, dtype=np.int64)
    cdef i64[::1] S = S_arr, back = back_arr
    cdef i64* tmp = <i64*> malloc((nq + 1) * sizeof(i64))
    cdef i64* ov = <i64*> calloc(P * P + 1, sizeof(i64))
    cdef i64* bmax = <i64*> calloc(P + 1, sizeof(i64))
    cdef i64* keys = <i64*> malloc((B + 1) * sizeof(i64))
    cdef Py_ssize_t* cands = <Py_ssize_t*> malloc((B + 1) * sizeof(Py_ssize_t))
    cdef Py_ssize_t i, ip, l, pid, pp, q, j, x, lo = 0, arg, nc, a
    cdef i64 best, sc, tot, lb, xk
    with nogil:
        for pid in range(base[0], base[1]):
            S[pid] = 0
        for i in range(1, B):
            while lo < i and ends[lo] < i:
                lo += 1
            for l in range(i + 1, ends[i] + 1):
                pid = base[i] + l - i - 1
                best = INF
                arg = -1
                if not relabel:
                    for ip in range(lo, i):
                        if ends[ip] < i:
                            continue
                        pp = base[ip] + i - ip - 1
                        if S[pp] >= INF:
                            continue
                        sc = 0
                        for q in range(nq):
                            sc += D[homes[pp, q], homes[pid, q]]
                        tot = S[pp] + sc
                        if tot < best:
                            best = tot
                            arg = ip
                else:
                    # order candidates by S + lower bound, prune past the best total
                    nc = 0
                    for ip in range(lo, i):
                        if ends[ip] < i:
                            continue
                        pp = base[ip] + i - ip - 1
                        if S[pp] >= INF:
                            continue
                        lb = nq
                        for q in range(nq):
                            j = homes[pid, q]
                            x = j * P + homes[pp, q]
                            ov[x] += 1
                            if ov[x] > bmax[j]:
                                bmax[j] = ov[x]
                                lb -= 1
                        for q in range(nq):
                            j = homes[pid, q]
                            ov[j * P + homes[pp, q]] = 0
                            bmax[j] = 0
                        xk = S[pp] + lb
                        a = nc
                        while a > 0 and keys[a - 1] > xk:
                            keys[a] = keys[a - 1]
                            cands[a] = cands[a - 1]
                            a -= 1
                        keys[a] = xk
                        cands[a] = ip
                        nc += 1
                    for a in range(nc):
                        if keys[a] > best:
                            break
                        ip = cands[a]
                        pp = base[ip] + i - ip - 1
                        memcpy(tmp, &homes[pid, 0], nq * sizeof(i64))
                        _relabel(nq, P, &homes[pp, 0], tmp, &D[0, 0])
                        sc = 0
                        for q in range(nq):
                            sc += D[homes[pp, q], tmp[q]]
                        tot = S[pp] + sc
                        if tot < best or (tot == best and ip < arg):
                            best = tot
                            arg = ip
                if arg >= 0:
                    S[pid] = best
                    back[pid] = arg
    free(tmp)
    free(ov)
    free(bmax)
    free(keys)
    free(cands)
    return _chain(ends, base, back, S, B)


cdef i64 _sc_star(Py_ssize_t nq, Py_ssize_t P, const i64* prev, const i64* lab,
                  const i64* piece_home, const i64* D, const i64* caps, bint relabel,
                  Py_ssize_t iters, Py_ssize_t tabu_len, const u64* zob,
                  i64* out) noexcept nogil:
    cdef Py_ssize_t G = 0, g, h, p, q, i, j, x, bestp
    cdef i64 bestv, s
    cdef int ok = 1
    for q in range(nq):
        if lab[q] + 1 > G:
            G = lab[q] + 1
    cdef i64* sizes = <i64*> calloc(G + 1, sizeof(i64))
    cdef i64* cnt = <i64*> calloc(G * P + 1, sizeof(i64))
    cdef i64* A = <i64*> calloc(G * P + 1, sizeof(i64))
    cdef i64* W = <i64*> calloc(G * G + 1, sizeof(i64))
    cdef i64* assign = <i64*> malloc((G + 1) * sizeof(i64))
    cdef i64* load = <i64*> calloc(P + 1, sizeof(i64))
    cdef Py_ssize_t* order = <Py_ssize_t*> malloc((G + 1) * sizeof(Py_ssize_t))
    for q in range(nq):
        sizes[lab[q]] += 1
        cnt[lab[q] * P + prev[q]] += 1
    # sparse products: only nonzero counts contribute
    for g in range(G):
        for x in range(P):
            s = cnt[g * P + x]
            if s:
                for p in range(P):
                    A[g * P + p] += s * D[x * P + p]
    for x in range(P):
        for g in range(G):
            s = cnt[g * P + x]
            if s:
                for h in range(g + 1, G):
                    if cnt[h * P + x]:
                        W[g * G + h] += s * cnt[h * P + x]
                        W[h * G + g] += s * cnt[h * P + x]
    for i in range(G):
        order[i] = i
    for i in range(1, G):
        x = order[i]
        j = i - 1
        while j >= 0 and sizes[order[j]] < sizes[x]:
            order[j + 1] = order[j]
            j -= 1
        order[j + 1] = x
    for i in range(G):
        g = order[i]
        bestp = -1
        bestv = INF
        for p in range(P):
            if load[p] + sizes[g] <= caps[p] and A[g * P + p] < bestv:
                bestp = p
                bestv = A[g * P + p]
        if bestp < 0:
            ok = 0
            break
        assign[g] = bestp
        load[bestp] += sizes[g]
    if not ok:
        for q in range(nq):
            assign[lab[q]] = piece_home[q]
    if _assign_cost(G, P, W, A, D, assign) > 0:
        _tabu(G, P, sizes, W, A, D, caps, assign, iters, tabu_len, zob)
    for q in range(nq):
        out[q] = assign[lab[q]]
    if relabel:
        _relabel(nq, P, prev, out, D)
    s = 0
    for q in range(nq):
        s += D[prev[q] * P + out[q]]
    free(sizes)
    free(cnt)
    free(A)
    free(W)
    free(assign)
    free(load)
    free(order)
    return s


def sc_star_kernel(prev, lab, piece_home, D, caps, bint relabel, Py_ssize_t iters,
                   Py_ssize_t tabu_len, zob):
    cdef const i64[::1] pv = np.ascontiguousarray(prev, dtype=np.int64)
    cdef const i64[::1] lv = np.ascontiguousarray(lab, dtype=np.int64)
    cdef const i64[::1] hv = np.ascontiguousarray(piece_home, dtype=np.int64)
    cdef const i64[:, ::1] Dv = np.ascontiguousarray(D, dtype=np.int64)
    cdef const i64[::1] cv = np.ascontiguousarray(caps, dtype=np.int64)
    cdef const u64[:, ::1] zv = np.ascontiguousarray(zob, dtype=np.uint64)
    cdef Py_ssize_t nq = pv.shape[0]
    out = np.zeros(nq, dtype=np.int64)
    cdef i64[::1] ov = out
    cdef i64 cost
    if nq == 0:
        return 0, out
    with nogil:
        cost = _sc_star(nq, Dv.shape[0], &pv[0], &lv[0], &hv[0], &Dv[0, 0], &cv[0],
                        relabel, iters, tabu_len, &zv[0, 0], &ov[0])
    return int(cost), out


def improved_dp(ends_in, base_in, homes_in, labels_in, D_in, caps_in, bint relabel,
                Py_ssize_t iters, Py_ssize_t tabu_len, zob_in):
    cdef const i64[::1] ends = np.ascontiguousarray(ends_in, dtype=np.int64)
    cdef const i64[::1] base = np.ascontiguousarray(base_in, dtype=np.int64)
    cdef const i64[:, ::1] homes = np.ascontiguousarray(homes_in, dtype=np.int64)
    cdef const i64[:, ::1] labels = np.ascontiguousarray(labels_in, dtype=np.int64)
    cdef const i64[:, ::1] D = np.ascontiguousarray(D_in, dtype=np.int64)
    cdef const i64[::1] caps = np.ascontiguousarray(caps_in, dtype=np.int64)
    cdef const u64[:, ::1] zob = np.ascontiguousarray(zob_in, dtype=np.uint64)
    cdef Py_ssize_t B = ends.shape[0], P = D.shape[0], nq = homes.shape[1]
    cell_arr = np.array(homes_in, dtype=np.int64)
    if B == 0:
        return 0, [0], cell_arr[:0]
    cdef i64[:, ::1] cell = cell_arr
    cdef Py_ssize_t npieces = base[B]
    S_arr = np.full(npieces, INF, dtype=np.int64)
    back_arr = np.full(npieces, -1, dtype=np.int64)
    cdef i64[::1] S = S_arr, back = back_arr
    cdef i64* keys = <i64*> malloc((B + 1) * sizeof(i64))
    cdef Py_ssize_t* cands = <Py_ssize_t*> malloc((B + 1) * sizeof(Py_ssize_t))
    cdef i64* cnt = <i64*> calloc(nq * P + 1, sizeof(i64))
    cdef i64* gmax = <i64*> calloc(nq + 1, sizeof(i64))
    cdef Py_ssize_t* evald = <Py_ssize_t*> malloc((B + 1) * sizeof(Py_ssize_t))
    cdef i64* tmp = <i64*> malloc((nq + 1) * sizeof(i64))
    cdef i64* besth = <i64*> malloc((nq + 1) * sizeof(i64))
    cdef Py_ssize_t i, ip, l, pid, pp, q, g, lo = 0, arg, nc, nev, a, b, x
    cdef i64 best, tot, cost, lb, xk
    cdef int dup
    with nogil:
        for pid in range(base[0], base[1]):
            S[pid] = 0
        for i in range(1, B):
            while lo < i and ends[lo] < i:
                lo += 1
            for l in range(i + 1, ends[i] + 1):
                pid = base[i] + l - i - 1
                nc = 0
                for ip in range(lo, i):
                    if ends[ip] < i:
                        continue
                    pp = base[ip] + i - ip - 1
                    if S[pp] >= INF:
                        continue
                    # lower bound: every qubit outside its group's majority computer moves
                    lb = nq
                    for q in range(nq):
                        g = labels[pid, q]
                        x = g * P + cell[pp, q]
                        cnt[x] += 1
                        if cnt[x] > gmax[g]:
                            gmax[g] = cnt[x]
                            lb -= 1
                    for q in range(nq):
                        g = labels[pid, q]
                        cnt[g * P + cell[pp, q]] = 0
                        gmax[g] = 0
                    # insertion by (key, ip); ip arrives in increasing order
                    xk = S[pp] + lb
                    a = nc
                    while a > 0 and keys[a - 1] > xk:
                        keys[a] = keys[a - 1]
                        cands[a] = cands[a - 1]
                        a -= 1
                    keys[a] = xk
                    cands[a] = ip
                    nc += 1
                best = INF
                arg = -1
                nev = 0
                for a in range(nc):
                    if keys[a] >= best:
                        break
                    ip = cands[a]
                    pp = base[ip] + i - ip - 1
                    # an identical predecessor home sorts earlier with no larger S,
                    # so it cannot improve on the candidate already evaluated
                    dup = 0
                    for b in range(nev):
                        if memcmp(&cell[pp, 0], &cell[evald[b], 0], nq * sizeof(i64)) == 0:
                            dup = 1
                            break
                    if dup:
                        continue
                    evald[nev] = pp
                    nev += 1
                    cost = _sc_star(nq, P, &cell[pp, 0], &labels[pid, 0], &homes[pid, 0],
                                    &D[0, 0], &caps[0], relabel, iters, tabu_len,
                                    &zob[0, 0], tmp)
                    tot = S[pp] + cost
                    if tot < best:
                        best = tot
                        arg = ip
                        memcpy(besth, tmp, nq * sizeof(i64))
                if arg >= 0:
                    S[pid] = best
                    back[pid] = arg
                    memcpy(&cell[pid, 0], besth, nq * sizeof(i64))
    free(keys)
    free(cands)
    free(cnt)
    free(gmax)
    free(evald)
    free(tmp)
    free(besth)
    cost_out, bounds = _chain(ends, base, back, S, B)
    if not bounds:
        return cost_out, bounds, cell_arr[:0]
    rows = [base[x] + y - x - 1 for x, y in zip(bounds, bounds[1:])]
    return cost_out, bounds, cell_arr[rows].reshape(-1, nq)
