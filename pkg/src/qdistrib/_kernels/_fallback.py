"""Pure-Python kernels.

Reference semantics for the compiled core in ``_core.pyx``; both must give
identical results (same tie-breaking, same integer arithmetic).  Arrays are
int64 throughout, Zobrist keys are uint64.
"""

from __future__ import annotations

from collections import deque

import numpy as np

INF = np.iinfo(np.int64).max // 4


# --------------------------------------------------------------------------
# tabu search over grouped assignments


def assignment_cost(W, A, D, assign) -> int:
    """Cut cost ``sum_{g<h} W[g,h] * D[a_g, a_h]`` plus placement penalties."""
    if len(assign) == 0:
        return 0
    cut = int((W * D[np.ix_(assign, assign)]).sum()) // 2
    return cut + int(A[np.arange(len(assign)), assign].sum())


def tabu_kernel(sizes, W, A, D, caps, assign0, iters, tabu_len, zob):
    """Best-improvement tabu search; returns ``(best_assign, best_cost)``.

    Neighbours are single-group moves then pairwise swaps, scanned in index
    order; the first minimal-delta neighbour whose fingerprint is not in the
    tabu list wins.
    """
    G, P = A.shape
    a = np.array(assign0, dtype=np.int64)
    best_a = a.copy()
    cost = assignment_cost(W, A, D, a)
    best = cost
    if G == 0 or P <= 1 or iters <= 0:
        return best_a, best
    load = np.bincount(a, weights=sizes, minlength=P).astype(np.int64)
    C = W @ D[:, a].T  # C[g, p] = sum_h W[g, h] * D[p, a_h]
    gi = np.arange(G)
    pi = np.arange(P)
    iu, ju = np.triu_indices(G, 1)
    h = np.bitwise_xor.reduce(zob[gi, a]) if G else np.uint64(0)
    tabu = deque([int(h)], maxlen=tabu_len) if tabu_len > 0 else deque(maxlen=0)
    n_moves = G * P
    for _ in range(iters):
        cur = C[gi, a] + A[gi, a]
        mdelta = (C + A - cur[:, None]).ravel()
        mvalid = ((load[None, :] + sizes[:, None] <= caps[None, :]) & (pi[None, :] != a[:, None])).ravel()
        ag, ah = a[iu], a[ju]
        sdelta = (
            C[iu, ah] - C[iu, ag] + C[ju, ag] - C[ju, ah]
            + 2 * W[iu, ju] * D[ag, ah]
            + A[iu, ah] - A[iu, ag] + A[ju, ag] - A[ju, ah]
        )
        svalid = (
            (ag != ah)
            & (load[ag] - sizes[iu] + sizes[ju] <= caps[ag])
            & (load[ah] - sizes[ju] + sizes[iu] <= caps[ah])
        )
        idx = np.concatenate([np.flatnonzero(mvalid), n_moves + np.flatnonzero(svalid)])
        if len(idx) == 0:
            break
        deltas = np.concatenate([mdelta[mvalid], sdelta[svalid]])
        chosen = -1
        for j in np.argsort(deltas, kind="stable"):
            c = int(idx[j])
            if c < n_moves:
                g, p = divmod(c, P)
                nh = int(h) ^ int(zob[g, a[g]]) ^ int(zob[g, p])
            else:
                s = c - n_moves
                g, k = int(iu[s]), int(ju[s])
                nh = (int(h) ^ int(zob[g, a[g]]) ^ int(zob[g, a[k]])
                      ^ int(zob[k, a[k]]) ^ int(zob[k, a[g]]))
            if nh not in tabu:
                chosen = j
                break
        if chosen < 0:
            break
        c = int(idx[chosen])
        cost += int(deltas[chosen])
        if c < n_moves:
            g, p = divmod(c, P)
            _move(C, W, D, load, sizes, a, g, p)
        else:
            s = c - n_moves
            g, k = int(iu[s]), int(ju[s])
            pg, pk = int(a[g]), int(a[k])
            _move(C, W, D, load, sizes, a, g, pk)
            _move(C, W, D, load, sizes, a, k, pg)
        h = nh
        tabu.append(h)
        if cost < best:
            best = cost
            best_a = a.copy()
    return best_a, best


def _move(C, W, D, load, sizes, a, g, p):
    old = a[g]
    C += np.outer(W[:, g], D[:, p] - D[:, old])
    load[old] -= sizes[g]
    load[p] += sizes[g]
    a[g] = p


# --------------------------------------------------------------------------
# assignment problem


def hungarian(cost) -> np.ndarray:
    """Minimum-cost perfect matching on a square matrix; ``row -> column``."""
    n = len(cost)
    u = [0] * (n + 1)
    v = [0] * (n + 1)
    p = [0] * (n + 1)
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [INF] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = INF
            j1 = 0
            row = cost[i0 - 1]
            for j in range(1, n + 1):
                if not used[j]:
                    cur = int(row[j - 1]) - u[i0] - v[j]
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
    out = np.empty(n, dtype=np.int64)
    for j in range(1, n + 1):
        out[p[j] - 1] = j - 1
    return out


def relabel_home(prev, new, D):
    """Permute computer labels of ``new`` to minimise the move cost from ``prev``.

    Among optimal permutations the one fixing the most labels is chosen.
    """
    P = len(D)
    M = np.zeros((P, P), dtype=np.int64)
    # M[j, p]: cost of renaming block j of ``new`` to computer p
    np.add.at(M, new, D[prev])
    M = M * (P + 1) + (1 - np.eye(P, dtype=np.int64))
    perm = hungarian(M)
    return perm[new]


# --------------------------------------------------------------------------
# zero-cost sub-circuit table


def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def _labels(parent, nq):
    lab = np.empty(nq, dtype=np.int64)
    seen = {}
    for q in range(nq):
        r = _find(parent, q)
        if r not in seen:
            seen[r] = len(seen)
        lab[q] = seen[r]
    return lab, len(seen)


def pack_components(lab, ncomp, caps, ffd):
    """First-fit (decreasing) packing of components into computers.

    Returns the home function or ``None`` if some component does not fit.
    Singletons always come after multi-qubit components.
    """
    sizes = np.bincount(lab, minlength=ncomp)
    if ffd:
        order = sorted(range(ncomp), key=lambda c: (-sizes[c], c))
    else:
        order = [c for c in range(ncomp) if sizes[c] > 1] + [c for c in range(ncomp) if sizes[c] == 1]
    load = [0] * len(caps)
    where = np.empty(ncomp, dtype=np.int64)
    for c in order:
        s = sizes[c]
        for p in range(len(caps)):
            if load[p] + s <= caps[p]:
                load[p] += s
                where[c] = p
                break
        else:
            return None
    return where[lab]


def zcsc_scan(pairs, nq, caps, ffd=True):
    """Feasible pieces between binary-gate boundaries.

    Piece ``(k, l)`` holds binary gates ``k..l-1``.  Returns ``ends`` (the
    largest feasible ``l`` per start ``k``), ``base`` (row offsets: piece id is
    ``base[k] + l - k - 1``), and per-piece home functions and component
    labels.  Feasibility is made downward closed: once packing fails for a
    start, the remaining pieces inside the previous start's range borrow that
    start's home, which is valid for the sub-piece.
    """
    B = len(pairs)
    ends = np.zeros(B, dtype=np.int64)
    base = np.zeros(B + 1, dtype=np.int64)
    homes: list[np.ndarray] = []
    labels: list[np.ndarray] = []
    prev_end = 0
    prev_homes: dict[int, np.ndarray] = {}
    for k in range(B):
        parent = list(range(nq))
        ok = True
        cur: dict[int, np.ndarray] = {}
        l = k
        while l < B:
            a, b = int(pairs[l, 0]), int(pairs[l, 1])
            ra, rb = _find(parent, a), _find(parent, b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
            l += 1
            lab, ncomp = _labels(parent, nq)
            if ok:
                home = pack_components(lab, ncomp, caps, ffd)
                if home is None:
                    ok = False
            if ok:
                h = home
            elif l <= prev_end:
                h = prev_homes[l]
            else:
                break
            cur[l] = h
            homes.append(h)
            labels.append(lab)
        ends[k] = k + len(cur)
        base[k + 1] = base[k] + len(cur)
        prev_end = ends[k]
        prev_homes = cur
    shape = (len(homes), nq)
    homes_arr = np.array(homes, dtype=np.int64).reshape(shape)
    labels_arr = np.array(labels, dtype=np.int64).reshape(shape)
    return ends, base, homes_arr, labels_arr


# --------------------------------------------------------------------------
# division DPs


def _chain(ends, base, back, S, B):
    best, arg = INF, -1
    for i in range(B):
        if ends[i] == B:
            pid = base[i] + B - i - 1
            if S[pid] < best:
                best, arg = int(S[pid]), i
    if arg < 0:
        return INF, []
    bounds = [B]
    j, i = B, arg
    while True:
        bounds.append(i)
        if i == 0:
            break
        pid = base[i] + j - i - 1
        j, i = i, int(back[pid])
    bounds.reverse()
    return best, bounds


def simple_dp(ends, base, homes, D, relabel):
    """Optimal division for fixed per-piece homes.

    Returns ``(cost, boundaries)``; boundaries run from 0 to B.  ``relabel``
    scores each stitch after the best computer relabelling.
    """
    B = len(ends)
    npieces = int(base[B])
    S = np.full(npieces, INF, dtype=np.int64)
    back = np.full(npieces, -1, dtype=np.int64)
    if B == 0:
        return 0, [0]
    S[base[0]:base[1]] = 0
    lo = 0
    for i in range(1, B):
        while lo < i and ends[lo] < i:
            lo += 1
        cands = [ip for ip in range(lo, i) if ends[ip] >= i and S[base[ip] + i - ip - 1] < INF]
        if not cands:
            continue
        pps = np.array([base[ip] + i - ip - 1 for ip in cands], dtype=np.int64)
        prevS = S[pps]
        for l in range(i + 1, ends[i] + 1):
            pid = base[i] + l - i - 1
            target = homes[pid]
            if relabel:
                sc = np.array([int(D[homes[pp], relabel_home(homes[pp], target, D)].sum()) for pp in pps])
            else:
                sc = D[homes[pps], target[None, :]].sum(axis=1)
            tot = prevS + sc
            j = int(np.argmin(tot))
            S[pid] = tot[j]
            back[pid] = cands[j]
    return _chain(ends, base, back, S, B)


def sc_star_kernel(prev, lab, piece_home, D, caps, relabel, iters, tabu_len, zob):
    """Recompute a piece's home close to ``prev``; returns ``(cost, home)``.

    Groups are the piece's connected components.  The tabu objective is the
    split weight of qubit pairs co-located under ``prev`` plus the distance
    every group's qubits travel from ``prev``.
    """
    P = len(D)
    G = int(lab.max()) + 1 if len(lab) else 0
    sizes = np.bincount(lab, minlength=G).astype(np.int64)
    cnt = np.zeros((G, P), dtype=np.int64)
    np.add.at(cnt, (lab, prev), 1)
    A = cnt @ D
    W = cnt @ cnt.T
    np.fill_diagonal(W, 0)
    assign = np.full(G, -1, dtype=np.int64)
    load = np.zeros(P, dtype=np.int64)
    ok = True
    for g in sorted(range(G), key=lambda g: (-sizes[g], g)):
        bestp, bestv = -1, INF
        for p in range(P):
            if load[p] + sizes[g] <= caps[p] and A[g, p] < bestv:
                bestp, bestv = p, A[g, p]
        if bestp < 0:
            ok = False
            break
        assign[g] = bestp
        load[bestp] += sizes[g]
    if not ok:
        assign[lab] = piece_home
    if assignment_cost(W, A, D, assign) > 0:
        assign, _ = tabu_kernel(sizes, W, A, D, caps, assign, iters, tabu_len, zob[:G])
    new = assign[lab]
    if relabel:
        new = relabel_home(prev, new, D)
    return int(D[prev, new].sum()), new


def improved_dp(ends, base, homes, labels, D, caps, relabel, iters, tabu_len, zob):
    """Division DP that recomputes each piece's home against its predecessor.

    Candidates for a cell are tried in order of (predecessor cost + lower
    bound on the stitch, predecessor start) and pruned once that key reaches
    the best total found.  Returns ``(cost, boundaries, chain_homes)``.
    """
    B = len(ends)
    nq = homes.shape[1]
    npieces = int(base[B])
    S = np.full(npieces, INF, dtype=np.int64)
    back = np.full(npieces, -1, dtype=np.int64)
    cell_home = homes.copy()
    if B == 0:
        return 0, [0], cell_home[:0]
    S[base[0]:base[1]] = 0
    lo = 0
    for i in range(1, B):
        while lo < i and ends[lo] < i:
            lo += 1
        cands = [ip for ip in range(lo, i) if ends[ip] >= i and S[base[ip] + i - ip - 1] < INF]
        if not cands:
            continue
        for l in range(i + 1, ends[i] + 1):
            pid = base[i] + l - i - 1
            lab = labels[pid]
            G = int(lab.max()) + 1
            keyed = []
            for ip in cands:
                pp = base[ip] + i - ip - 1
                cnt = np.zeros((G, len(D)), dtype=np.int64)
                np.add.at(cnt, (lab, cell_home[pp]), 1)
                lb = nq - int(cnt.max(axis=1).sum())
                keyed.append((int(S[pp]) + lb, ip, pp))
            keyed.sort()
            best, arg, besth = INF, -1, None
            for key, ip, pp in keyed:
                if key >= best:
                    break
                cost, h = sc_star_kernel(
                    cell_home[pp], lab, homes[pid], D, caps, relabel, iters, tabu_len, zob
                )
                tot = int(S[pp]) + cost
                if tot < best:
                    best, arg, besth = tot, ip, h
            S[pid] = best
            back[pid] = arg
            cell_home[pid] = besth
    cost, bounds = _chain(ends, base, back, S, B)
    if not bounds:
        return cost, bounds, cell_home[:0]
    chain = np.array(
        [cell_home[base[a] + b - a - 1] for a, b in zip(bounds, bounds[1:])], dtype=np.int64
    ).reshape(-1, nq)
    return cost, bounds, chain
