"""Tabu search assigning qubits, or groups of qubits, to computers.

The objective is the weighted-distance cut cost: every pair of groups split
across computers ``a`` and ``b`` pays its weight times ``dist(a, b)``.  An
optional anchor term adds a per-(group, computer) penalty, which lets the
same engine keep groups close to a previous assignment.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .circuit import Circuit
from .network import Network
from .placement import HomeFunction, InfeasibleInstanceError

__all__ = [
    "build_weights",
    "tabu_cost",
    "GroupedInstance",
    "TabuResult",
    "zobrist_keys",
    "first_fit_decreasing",
    "tabu_search",
    "DEFAULT_ITERATIONS",
    "DEFAULT_TABU_LENGTH",
]

DEFAULT_ITERATIONS = 500
DEFAULT_TABU_LENGTH = 10


def build_weights(c: Circuit, start: int | None = None, end: int | None = None) -> np.ndarray:
    """Symmetric matrix counting binary gates per qubit pair.

    With ``start``/``end`` only gates at instants strictly between them are
    counted.
    """
    n = c.num_qubits
    w = np.zeros((n, n), dtype=np.int64)
    pairs, times = c.binary_pairs, c.binary_times
    keep = np.ones(len(times), dtype=bool)
    if start is not None:
        keep &= times > start
    if end is not None:
        keep &= times < end
    a, b = pairs[keep, 0], pairs[keep, 1]
    np.add.at(w, (a, b), 1)
    np.add.at(w, (b, a), 1)
    return w


def tabu_cost(home: Sequence[int], w: np.ndarray, net: Network) -> int:
    """Sum of ``w[q1, q2] * dist(home[q1], home[q2])`` over unordered pairs."""
    h = np.asarray(home, dtype=np.int64)
    if len(h) == 0:
        return 0
    return int((w * net.dist[np.ix_(h, h)]).sum()) // 2


@dataclass(frozen=True)
class GroupedInstance:
    """Groups of qubits that must share a computer.

    ``groups[q]`` is the group label of qubit ``q`` (labels ``0..G-1``).
    ``weights`` is the symmetric inter-group weight matrix and
    ``anchor_penalties[g, p]`` the cost of placing group ``g`` on computer
    ``p`` (all zero when omitted).
    """

    groups: np.ndarray
    weights: np.ndarray
    anchor_penalties: np.ndarray | None = None

    def __post_init__(self):
        groups = np.asarray(self.groups, dtype=np.int64)
        w = np.asarray(self.weights, dtype=np.int64)
        g = int(groups.max()) + 1 if len(groups) else 0
        if len(groups) and (groups.min() < 0 or len(np.unique(groups)) != g):
            raise ValueError("group labels must be exactly 0..G-1")
        if w.shape != (g, g):
            raise ValueError(f"weights must be {g}x{g}, got {w.shape}")
        if (w != w.T).any() or (np.diag(w) != 0).any() or (w < 0).any():
            raise ValueError("weights must be symmetric, non-negative, zero on the diagonal")
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "weights", w)
        if self.anchor_penalties is not None:
            object.__setattr__(
                self, "anchor_penalties", np.asarray(self.anchor_penalties, dtype=np.int64)
            )

    @classmethod
    def singletons(cls, w: np.ndarray) -> GroupedInstance:
        """One group per qubit."""
        return cls(np.arange(len(w)), w)

    @property
    def num_groups(self) -> int:
        return len(self.weights)

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.groups, minlength=self.num_groups).astype(np.int64)

    def penalties(self, num_computers: int) -> np.ndarray:
        if self.anchor_penalties is None:
            return np.zeros((self.num_groups, num_computers), dtype=np.int64)
        if self.anchor_penalties.shape != (self.num_groups, num_computers):
            raise ValueError("anchor_penalties must have one row per group and one column per computer")
        return self.anchor_penalties

    def objective(self, assignment: Sequence[int], net: Network) -> int:
        a = np.asarray(assignment, dtype=np.int64)
        return _kernels.assignment_cost(self.weights, self.penalties(net.num_computers), net.dist, a)


@dataclass(frozen=True)
class TabuResult:
    home: HomeFunction
    assignment: tuple[int, ...]
    cost: int
    initial_cost: int


def zobrist_keys(rows: int, cols: int, seed: int | None) -> np.ndarray:
    """Random 64-bit keys used to fingerprint assignments."""
    rng = np.random.default_rng(seed)
    return rng.integers(0, np.iinfo(np.uint64).max, size=(rows, cols), dtype=np.uint64, endpoint=True)


def first_fit_decreasing(sizes: Sequence[int], capacities: Sequence[int]) -> np.ndarray | None:
    """Groups by decreasing size (stable), each on the first computer it fits."""
    sizes = np.asarray(sizes, dtype=np.int64)
    load = np.zeros(len(capacities), dtype=np.int64)
    out = np.empty(len(sizes), dtype=np.int64)
    for g in np.argsort(-sizes, kind="stable"):
        for p, cap in enumerate(capacities):
            if load[p] + sizes[g] <= cap:
                load[p] += sizes[g]
                out[g] = p
                break
        else:
            return None
    return out


def _perturb(assign, sizes, caps, rng, steps):
    """Random capacity-respecting moves and swaps."""
    a = assign.copy()
    G, P = len(a), len(caps)
    if G == 0 or P < 2:
        return a
    load = np.bincount(a, weights=sizes, minlength=P).astype(np.int64)
    for _ in range(steps):
        g = int(rng.integers(G))
        if rng.random() < 0.5:
            p = int(rng.integers(P))
            if p != a[g] and load[p] + sizes[g] <= caps[p]:
                load[a[g]] -= sizes[g]
                load[p] += sizes[g]
                a[g] = p
        else:
            k = int(rng.integers(G))
            pg, pk = a[g], a[k]
            if pg != pk and load[pg] - sizes[g] + sizes[k] <= caps[pg] and load[pk] - sizes[k] + sizes[g] <= caps[pk]:
                load[pg] += sizes[k] - sizes[g]
                load[pk] += sizes[g] - sizes[k]
                a[g], a[k] = pk, pg
    return a


def tabu_search(
    inst: GroupedInstance,
    net: Network,
    iterations: int = DEFAULT_ITERATIONS,
    tabu_length: int = DEFAULT_TABU_LENGTH,
    seed: int | None = 0,
    initial: Sequence[int] | None = None,
) -> TabuResult:
    """Best-found capacity-valid group assignment.

    The start is first-fit decreasing on group sizes followed by a random
    perturbation, unless ``initial`` (a group assignment) is given.  Each
    iteration takes the cheapest neighbour (single-group move or swap of two
    groups on different computers) whose full assignment is not among the
    last ``tabu_length`` visited ones; ties go to the lowest group index, then
    computer index, with moves before swaps.
    """
    if iterations < 0 or tabu_length < 0:
        raise ValueError("iterations and tabu_length must be non-negative")
    sizes = inst.sizes
    caps = net.capacity_array
    P = net.num_computers
    A = inst.penalties(P)
    rng = np.random.default_rng(seed)
    if initial is None:
        start = first_fit_decreasing(sizes, caps)
        if start is None:
            raise InfeasibleInstanceError("no capacity-valid assignment of the groups found")
        start = _perturb(start, sizes, caps, rng, inst.num_groups)
    else:
        start = np.asarray(initial, dtype=np.int64)
        if len(start) != inst.num_groups:
            raise ValueError("initial assignment must have one entry per group")
        if (np.bincount(start, weights=sizes, minlength=P) > caps).any():
            raise InfeasibleInstanceError("initial assignment exceeds capacity")
    zob = zobrist_keys(max(inst.num_groups, 1), P, int(rng.integers(2**63)))
    initial_cost = _kernels.assignment_cost(inst.weights, A, net.dist, start)
    best, cost = _kernels.tabu_kernel(
        sizes, inst.weights, A, net.dist, caps, start, iterations, tabu_length, zob
    )
    best = np.asarray(best, dtype=np.int64)
    home = tuple(int(p) for p in best[inst.groups])
    return TabuResult(home, tuple(int(p) for p in best), int(cost), int(initial_cost))
