"""Local-Best: lazy teleportation guided by the next few binary gates.

Qubits start on a tabu-search assignment.  The circuit is then scanned left
to right; each binary gate that is non-local under the current homes is
executed on the computer with the highest look-ahead benefit, and the
operands (plus any residents evicted to make room) are teleported there at
the even instant right before the gate.
"""

from __future__ import annotations

import itertools
from bisect import bisect_right
from typing import Sequence

import numpy as np

from .circuit import Circuit
from .network import Network
from .placement import InfeasibleInstanceError, Schedule, Teleportation
from .tabu import DEFAULT_ITERATIONS, DEFAULT_TABU_LENGTH, GroupedInstance, build_weights, tabu_search

__all__ = [
    "DEFAULT_LOOKAHEAD",
    "LookaheadIndex",
    "benefit",
    "choose_computer",
    "select_evictions",
    "preference_order",
    "eviction_destination",
    "local_best",
]

DEFAULT_LOOKAHEAD = 5


class LookaheadIndex:
    """Per-qubit lists of binary-gate indices for window queries."""

    def __init__(self, c: Circuit):
        self.pairs = c.binary_pairs
        self.times = c.binary_times
        per: list[list[int]] = [[] for _ in range(c.num_qubits)]
        for k, (a, b) in enumerate(self.pairs):
            per[a].append(k)
            per[b].append(k)
        self.per_qubit = per

    def next_gates(self, q: int, k: int, r: int) -> list[int]:
        """Indices of the next ``r`` binary gates on ``q`` strictly after gate ``k``."""
        lst = self.per_qubit[q]
        s = bisect_right(lst, k)
        return lst[s:s + r]

    def horizon(self, q: int, k: int, r: int) -> int:
        """Instant of the ``r``-th future binary gate on ``q`` (or the last one, or gate ``k``)."""
        fut = self.next_gates(q, k, r)
        return int(self.times[fut[-1] if fut else k])

    def partner(self, k: int, q: int) -> int:
        a, b = self.pairs[k]
        return int(b if a == q else a)

    def window(self, k: int, until: int) -> range:
        """Binary-gate indices after ``k`` with instant ``<= until``."""
        return range(k + 1, int(np.searchsorted(self.times, until, side="right")))


def _weight(idx: LookaheadIndex, q: int, k: int, r: int, home: Sequence[int], p: int) -> int:
    return sum(1 for j in idx.next_gates(q, k, r) if home[idx.partner(j, q)] == p)


def _pair_weight(idx: LookaheadIndex, k: int, until: int) -> int:
    a, b = idx.pairs[k]
    return sum(
        1 for j in idx.next_gates(int(a), k, len(idx.per_qubit[a]))
        if idx.times[j] <= until and idx.partner(j, int(a)) == b
    )


def benefit(
    k: int, p: int, home: Sequence[int], loads: Sequence[int], capacities: Sequence[int],
    idx: LookaheadIndex, r: int,
) -> int:
    """Look-ahead benefit of executing binary gate ``k`` on computer ``p``.

    ``W1`` (``W2``) counts the next ``r`` binary gates of the first (second)
    operand whose partner currently sits on ``p``; gates between the two
    operands up to the later horizon are subtracted once, and every slot that
    must be freed on ``p`` costs ``r``.
    """
    q1, q2 = (int(x) for x in idx.pairs[k])
    w1 = _weight(idx, q1, k, r, home, p)
    w2 = _weight(idx, q2, k, r, home, p)
    until = max(idx.horizon(q1, k, r), idx.horizon(q2, k, r))
    w12 = _pair_weight(idx, k, until)
    incoming = (home[q1] != p) + (home[q2] != p)
    gaps = max(0, incoming - (capacities[p] - loads[p]))
    return w1 + w2 - w12 - r * gaps


def choose_computer(
    k: int, home: Sequence[int], loads: Sequence[int], capacities: Sequence[int],
    idx: LookaheadIndex, r: int,
) -> int:
    """Computer with maximum benefit; ties favour an operand's host, then lower index."""
    q1, q2 = (int(x) for x in idx.pairs[k])
    hosts = {home[q1], home[q2]}
    best, best_key = -1, None
    for p in range(len(capacities)):
        if capacities[p] < 2:
            continue
        key = (-benefit(k, p, home, loads, capacities, idx, r), p not in hosts, p)
        if best_key is None or key < best_key:
            best, best_key = p, key
    if best < 0:
        raise InfeasibleInstanceError("no computer can hold both operands of a gate")
    return best


def select_evictions(
    candidates: Sequence[int], keep: Sequence[int], need: int, weight: dict[tuple[int, int], int]
) -> tuple[int, ...]:
    """The ``need`` candidates whose removal cuts the least weight.

    The cut of a set is the weight of edges from it to the qubits that stay
    (the other candidates plus ``keep``).  Ties go to the lexicographically
    smallest set of qubit indices.
    """
    if need <= 0:
        return ()
    cands = sorted(int(q) for q in candidates)
    if need > len(cands):
        raise InfeasibleInstanceError("not enough residents to evict")
    members = cands + [int(q) for q in keep]

    def w(a, b):
        return weight.get((a, b) if a < b else (b, a), 0)

    best, best_cut = (), None
    for sel in itertools.combinations(cands, need):
        chosen = set(sel)
        cut = sum(w(a, b) for a in sel for b in members if b not in chosen)
        if best_cut is None or cut < best_cut:
            best, best_cut = sel, cut
    return best


def preference_order(
    q: int, k: int, home: Sequence[int], net: Network, idx: LookaheadIndex, r: int
) -> list[int]:
    """Computers by partner count among ``q``'s next ``r`` gates, then distance, then index."""
    count = [0] * net.num_computers
    for j in idx.next_gates(q, k, r):
        count[home[idx.partner(j, q)]] += 1
    here = home[q]
    return sorted(range(net.num_computers), key=lambda p: (-count[p], net.dist[here, p], p))


def eviction_destination(
    q: int, k: int, home: Sequence[int], loads: Sequence[int], net: Network,
    idx: LookaheadIndex, r: int, exclude: int,
) -> int:
    """First computer on ``q``'s preference list with a free slot."""
    for p in preference_order(q, k, home, net, idx, r):
        if p != exclude and p != home[q] and loads[p] < net.capacities[p]:
            return p
    raise InfeasibleInstanceError(f"no free slot for evicted qubit {q}")


def local_best(
    c: Circuit,
    net: Network,
    lookahead: int = DEFAULT_LOOKAHEAD,
    tabu_iterations: int = DEFAULT_ITERATIONS,
    tabu_length: int = DEFAULT_TABU_LENGTH,
    seed: int | None = 0,
    initial: Sequence[int] | None = None,
) -> Schedule:
    """Schedule from a tabu initial assignment and look-ahead gate repairs.

    ``initial`` overrides the tabu assignment (useful for tests).
    """
    if lookahead < 1:
        raise ValueError("lookahead must be at least 1")
    if not net.can_host(c.num_qubits):
        raise InfeasibleInstanceError("total capacity below the number of qubits")
    if initial is None:
        w = build_weights(c)
        res = tabu_search(GroupedInstance.singletons(w), net, tabu_iterations, tabu_length, seed)
        home = list(res.home)
    else:
        home = [int(p) for p in initial]
    start = tuple(home)
    caps = list(net.capacities)
    loads = [0] * net.num_computers
    for p in home:
        loads[p] += 1
    idx = LookaheadIndex(c)
    r = lookahead
    teleports: list[Teleportation] = []
    for k in range(len(idx.pairs)):
        q1, q2 = (int(x) for x in idx.pairs[k])
        if home[q1] == home[q2]:
            continue
        t = int(idx.times[k]) - 1
        target = choose_computer(k, home, loads, caps, idx, r)
        incoming = [q for q in (q1, q2) if home[q] != target]
        need = max(0, len(incoming) - (caps[target] - loads[target]))
        evicted: tuple[int, ...] = ()
        if need:
            until = max(idx.horizon(q1, k, r), idx.horizon(q2, k, r))
            residents = [q for q in range(c.num_qubits) if home[q] == target and q not in (q1, q2)]
            keep = [q1, q2]
            members = set(residents) | set(keep)
            weight: dict[tuple[int, int], int] = {}
            for j in idx.window(k, until):
                a, b = int(idx.pairs[j, 0]), int(idx.pairs[j, 1])
                if a in members and b in members:
                    key = (a, b) if a < b else (b, a)
                    weight[key] = weight.get(key, 0) + 1
            evicted = select_evictions(residents, keep, need, weight)
        # operands leave their hosts first, so their slots count as free
        moves = []
        for q in incoming:
            moves.append(Teleportation(q, home[q], target, t))
            loads[home[q]] -= 1
            home[q] = target
        evictions = []
        for q in evicted:
            dest = eviction_destination(q, k, home, loads, net, idx, r, target)
            evictions.append(Teleportation(q, target, dest, t))
            loads[target] -= 1
            loads[dest] += 1
            home[q] = dest
        loads[target] += len(incoming)
        teleports += evictions + moves
        assert home[q1] == home[q2] and loads[target] <= caps[target]
    return Schedule(start, teleports)
