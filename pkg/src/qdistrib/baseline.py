"""Repeated Bisection baseline.

The qubit interaction graph is split into one part per computer by recursive
Kernighan-Lin bisection.  The resulting assignment stays fixed; every
non-local binary gate sends its first operand to the partner's computer
right before the gate and brings it back right after, two teleports each.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .circuit import Circuit
from .network import Network
from .placement import InfeasibleInstanceError, NonUniformCapacityError, Schedule, Teleportation
from .tabu import build_weights

__all__ = ["kernighan_lin_bisect", "cut_weight", "partition", "repeated_bisection"]


def cut_weight(side_a: Sequence[int], side_b: Sequence[int], weights: np.ndarray) -> int:
    a = np.asarray(side_a, dtype=np.int64)
    b = np.asarray(side_b, dtype=np.int64)
    if len(a) == 0 or len(b) == 0:
        return 0
    return int(weights[np.ix_(a, b)].sum())


def kernighan_lin_bisect(
    vertices: Sequence[int],
    weights: np.ndarray,
    size_bounds: tuple[int, int],
    seed: int | None = 0,
) -> tuple[list[int], list[int]]:
    """Split ``vertices`` into two sides with a small weighted cut.

    ``weights`` is indexed by vertex id.  ``size_bounds`` gives the minimum
    and maximum size of the first side; the split starts from a random
    arrangement with the first side as close to half as the bounds allow,
    and each pass swaps vertex pairs by best gain, then keeps the best
    prefix of swaps.  Passes repeat until one brings no improvement.
    """
    verts = np.asarray(list(vertices), dtype=np.int64)
    n = len(verts)
    lo, hi = size_bounds
    lo, hi = max(lo, 0), min(hi, n)
    if n < 2:
        raise ValueError("need at least two vertices to bisect")
    if lo > hi:
        raise InfeasibleInstanceError(f"size bounds {size_bounds} infeasible for {n} vertices")
    size_a = min(max(n // 2, lo), hi)
    rng = np.random.default_rng(seed)
    w = np.asarray(weights, dtype=np.int64)[np.ix_(verts, verts)]
    side = np.zeros(n, dtype=bool)  # True: first side
    side[rng.permutation(n)[:size_a]] = True
    if 0 < size_a < n:
        while True:
            if not _kl_pass(w, side):
                break
    a = sorted(int(v) for v in verts[side])
    b = sorted(int(v) for v in verts[~side])
    return a, b


def _kl_pass(w: np.ndarray, side: np.ndarray) -> bool:
    """One KL pass; applies the best positive prefix, returns whether it improved."""
    n = len(side)
    s = side.copy()
    same = s[:, None] == s[None, :]
    # D = external - internal weight
    d = np.where(same, -w, w).sum(axis=1)
    locked = np.zeros(n, dtype=bool)
    swaps: list[tuple[int, int]] = []
    gains: list[int] = []
    steps = min(int(s.sum()), n - int(s.sum()))
    for _ in range(steps):
        ia = np.flatnonzero(s & ~locked)
        ib = np.flatnonzero(~s & ~locked)
        g = d[ia][:, None] + d[ib][None, :] - 2 * w[np.ix_(ia, ib)]
        j = int(np.argmax(g))
        x, y = int(ia[j // len(ib)]), int(ib[j % len(ib)])
        gains.append(int(g.flat[j]))
        swaps.append((x, y))
        locked[x] = locked[y] = True
        # x moves to the second side, y to the first
        sx = np.where(s, 2, -2) * w[x]
        sy = np.where(s, -2, 2) * w[y]
        d += sx + sy
        s[x], s[y] = False, True
    if not gains:
        return False
    cum = np.cumsum(gains)
    k = int(np.argmax(cum))
    if cum[k] <= 0:
        return False
    for x, y in swaps[: k + 1]:
        side[x], side[y] = False, True
    return True


def partition(c: Circuit, net: Network, seed: int | None = 0) -> tuple[int, ...]:
    """Home function from recursive bisection over the whole-circuit weights.

    Each split divides the computers in half and the qubits in proportion to
    the halves' budgets, a budget being capacity minus one spare slot.
    """
    n, P = c.num_qubits, net.num_computers
    w = build_weights(c)
    budget = [max(cap - 1, 0) for cap in net.capacities]
    if sum(budget) < n:
        # no spare slot everywhere; fill to capacity instead
        budget = list(net.capacities)
    if sum(budget) < n:
        raise InfeasibleInstanceError("total capacity below the number of qubits")
    home = [0] * n
    rng = np.random.default_rng(seed)

    def split(qubits: list[int], computers: list[int]):
        if len(computers) == 1:
            for q in qubits:
                home[q] = computers[0]
            return
        half = (len(computers) + 1) // 2
        left, right = computers[:half], computers[half:]
        bl, br = sum(budget[p] for p in left), sum(budget[p] for p in right)
        m = len(qubits)
        lo, hi = max(m - br, 0), min(bl, m)
        if m < 2:
            if m and bl == 0:
                split(qubits, right)
            else:
                split(qubits, left)
                split([], right)
            return
        target = min(max(round(m * bl / (bl + br)), lo), hi)
        a, b = kernighan_lin_bisect(qubits, w, (target, target), int(rng.integers(2**63)))
        split(a, left)
        split(b, right)

    split(list(range(n)), list(range(P)))
    return tuple(home)


def repeated_bisection(c: Circuit, net: Network, seed: int | None = 0) -> Schedule:
    """Fixed bisection assignment with two-teleport round trips per non-local gate.

    The first operand visits its partner's computer.  If that computer is
    full the second operand travels instead; if both are full, a resident of
    the partner's computer with the least future interaction steps out for
    the duration of the gate, to the nearest free computer or, when there is
    none, into the slot the visitor left.
    """
    if not net.is_uniform:
        raise NonUniformCapacityError("repeated bisection requires uniform capacities")
    home = list(partition(c, net, seed))
    start = tuple(home)
    caps = net.capacities
    loads = [0] * net.num_computers
    for p in home:
        loads[p] += 1
    pairs, times = c.binary_pairs, c.binary_times
    future = np.zeros(c.num_qubits, dtype=np.int64)  # binary gates still ahead per qubit
    np.add.at(future, pairs.ravel(), 1)
    teleports: list[Teleportation] = []
    for k, (a, b) in enumerate(pairs):
        a, b = int(a), int(b)
        future[a] -= 1
        future[b] -= 1
        pa, pb = home[a], home[b]
        if pa == pb:
            continue
        t = int(times[k])
        if loads[pb] < caps[pb]:
            trips = [(a, pa, pb)]
        elif loads[pa] < caps[pa]:
            trips = [(b, pb, pa)]
        else:
            free = [p for p in range(net.num_computers) if loads[p] < caps[p]]
            residents = [q for q in range(c.num_qubits) if home[q] == pb and q != b]
            out = min(residents, key=lambda q: (int(future[q]), q))
            # with no spare slot anywhere the resident takes the visitor's place
            dest = min(free, key=lambda p: (int(net.dist[pb, p]), p)) if free else pa
            trips = [(out, pb, dest), (a, pa, pb)]
        for q, src, dst in trips:
            teleports.append(Teleportation(q, src, dst, t - 1))
        for q, src, dst in reversed(trips):
            teleports.append(Teleportation(q, dst, src, t + 1))
    teleports.sort(key=lambda tp: tp.time)
    return Schedule(start, teleports)
