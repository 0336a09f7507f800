"""Zero-Stitching: divide the circuit into zero-cost pieces and stitch them.

A piece is a run of consecutive gates that can execute with no teleport at
all: its interaction graph's connected components pack into the computers.
Pieces are found for every start boundary, then a dynamic program chooses
the division with the smallest total stitching cost.

Boundaries are indexed by binary gates: boundary ``k`` sits at the even
instant right before binary gate ``k`` (instant 0 for ``k = 0``, the last
instant for ``k = B``).  Unary gates never constrain a piece, so nothing is
lost by ignoring the even instants between two consecutive binary gates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .circuit import Circuit
from .network import Network
from .placement import (
    HomeFunction,
    InfeasibleInstanceError,
    NonUniformCapacityError,
    Schedule,
    Teleportation,
    transition_teleports,
)
from .tabu import DEFAULT_TABU_LENGTH, zobrist_keys

__all__ = [
    "PACKINGS",
    "STITCHES",
    "DPS",
    "DEFAULT_STITCH_ITERATIONS",
    "ZcscTable",
    "StitchResult",
    "DivisionResult",
    "detect_zcsc",
    "best_relabeling",
    "sc",
    "scb",
    "sc_star",
    "scb_star",
    "simple_dp",
    "improved_dp",
    "zero_stitching",
]

PACKINGS = ("ffd", "ff")
STITCHES = ("sc", "scb", "sc-star", "scb-star")
DPS = ("simple", "improved")
DEFAULT_STITCH_ITERATIONS = 10


@dataclass(frozen=True, eq=False)
class ZcscTable:
    """Every zero-cost piece of a circuit with its home function.

    ``ends[k]`` is the largest ``l`` such that the piece holding binary gates
    ``k..l-1`` is feasible.  Feasibility is downward closed, so every
    ``k < l <= ends[k]`` is feasible as well.
    """

    circuit: Circuit
    network: Network
    packing: str
    ends: np.ndarray
    base: np.ndarray
    homes: np.ndarray
    labels: np.ndarray
    empty_home: HomeFunction

    @property
    def num_binary(self) -> int:
        return len(self.ends)

    def boundary_instant(self, k: int) -> int:
        """Even instant of binary boundary ``k``."""
        if k <= 0:
            return 0
        if k >= self.num_binary:
            return self.circuit.last_instant
        return int(self.circuit.binary_times[k]) - 1

    def boundary_of(self, instant: int) -> int:
        """Number of binary gates before ``instant``."""
        return int(np.searchsorted(self.circuit.binary_times, instant, side="left"))

    def is_feasible(self, k: int, l: int) -> bool:
        if not 0 <= k <= l <= self.num_binary:
            raise ValueError(f"invalid piece ({k}, {l})")
        return k == l or l <= self.ends[k]

    def _pid(self, k: int, l: int) -> int:
        return int(self.base[k] + l - k - 1)

    def home(self, k: int, l: int) -> HomeFunction | None:
        """Home function of binary piece ``(k, l)``, or ``None`` if infeasible."""
        if not self.is_feasible(k, l):
            return None
        if k == l:
            return self.empty_home
        return tuple(int(p) for p in self.homes[self._pid(k, l)])

    def components(self, k: int, l: int) -> np.ndarray:
        """Connected-component label per qubit (labels ordered by smallest qubit)."""
        if k == l:
            return np.arange(self.circuit.num_qubits, dtype=np.int64)
        if not self.is_feasible(k, l):
            raise ValueError(f"piece ({k}, {l}) is not feasible")
        return self.labels[self._pid(k, l)]

    def lookup(self, start: int, end: int) -> HomeFunction | None:
        """Home function for the gates strictly between two even instants."""
        if start % 2 or end % 2 or not 0 <= start < end <= self.circuit.last_instant:
            raise ValueError(f"({start}, {end}) is not a pair of increasing even instants")
        return self.home(self.boundary_of(start), self.boundary_of(end))

    def pieces(self):
        """All feasible non-empty binary pieces ``(k, l)``."""
        for k in range(self.num_binary):
            for l in range(k + 1, int(self.ends[k]) + 1):
                yield k, l


def _singleton_home(nq: int, caps: Sequence[int]) -> HomeFunction:
    home = []
    p, load = 0, 0
    for _ in range(nq):
        while load >= caps[p]:
            p, load = p + 1, 0
        home.append(p)
        load += 1
    return tuple(home)


def detect_zcsc(c: Circuit, net: Network, packing: str = "ffd") -> ZcscTable:
    """Table of zero-cost pieces.

    Components of each piece's interaction graph are packed first fit,
    largest first (``"ffd"``) or in order of their smallest qubit
    (``"ff"``); qubits no binary gate touches are packed last.
    """
    if packing not in PACKINGS:
        raise ValueError(f"packing must be one of {PACKINGS}")
    if not net.can_host(c.num_qubits):
        raise InfeasibleInstanceError("total capacity below the number of qubits")
    caps = net.capacity_array
    ends, base, homes, labels = _kernels.zcsc_scan(c.binary_pairs, c.num_qubits, caps, packing == "ffd")
    return ZcscTable(c, net, packing, ends, base, homes, labels, _singleton_home(c.num_qubits, caps))


@dataclass(frozen=True)
class StitchResult:
    cost: int
    teleports: list[Teleportation]
    home: HomeFunction
    relabeling: tuple[int, ...] | None = None


def _require_uniform(net: Network, what: str):
    if not net.is_uniform:
        raise NonUniformCapacityError(f"{what} relabels computers and needs uniform capacities")


def _move_cost(prev: Sequence[int], new: Sequence[int], net: Network) -> int:
    return int(net.dist[np.asarray(prev), np.asarray(new)].sum())


def best_relabeling(prev: Sequence[int], new: Sequence[int], net: Network) -> tuple[int, ...]:
    """Permutation of computer labels for ``new`` that minimises the move cost from ``prev``.

    Solved as an assignment problem between the blocks of ``new`` and the
    computers; on a complete network this is the matching maximising the
    number of qubits that stay put.  Ties keep labels fixed where possible.
    """
    perm = _relabel_perm(np.asarray(prev, dtype=np.int64), np.asarray(new, dtype=np.int64), net.dist)
    return tuple(int(x) for x in perm)


def _relabel_perm(prev, new, D):
    P = len(D)
    M = np.zeros((P, P), dtype=np.int64)
    np.add.at(M, new, D[prev])
    M = M * (P + 1) + (1 - np.eye(P, dtype=np.int64))
    return _kernels.hungarian(M)


def _piece(table: ZcscTable, piece: tuple[int, int]) -> tuple[int, int]:
    start, end = piece
    k, l = table.boundary_of(start), table.boundary_of(end)
    if table.lookup(start, end) is None:
        raise InfeasibleInstanceError(f"piece ({start}, {end}) is not a zero-cost sub-circuit")
    return k, l


def sc(table: ZcscTable, piece_a: tuple[int, int], piece_b: tuple[int, int]) -> StitchResult:
    """Teleports turning piece A's table home into piece B's at their shared boundary."""
    if piece_a[1] != piece_b[0]:
        raise ValueError("pieces are not adjacent")
    ha = table.home(*_piece(table, piece_a))
    hb = table.home(*_piece(table, piece_b))
    tps = transition_teleports(ha, hb, piece_b[0])
    return StitchResult(_move_cost(ha, hb, table.network), tps, hb)


def scb(table: ZcscTable, piece_a: tuple[int, int], piece_b: tuple[int, int]) -> StitchResult:
    """Like :func:`sc` after relabelling piece B's computers to best match piece A."""
    _require_uniform(table.network, "scb")
    if piece_a[1] != piece_b[0]:
        raise ValueError("pieces are not adjacent")
    ha = table.home(*_piece(table, piece_a))
    hb = table.home(*_piece(table, piece_b))
    perm = _relabel_perm(np.asarray(ha), np.asarray(hb), table.network.dist)
    new = tuple(int(perm[p]) for p in hb)
    tps = transition_teleports(ha, new, piece_b[0])
    return StitchResult(_move_cost(ha, new, table.network), tps, new, tuple(int(x) for x in perm))


def _star(prev, table, piece, relabel, iterations, tabu_length, seed):
    net = table.network
    k, l = _piece(table, piece)
    prev = np.asarray(prev, dtype=np.int64)
    if len(prev) != table.circuit.num_qubits:
        raise ValueError("previous home function has the wrong length")
    if (np.bincount(prev, minlength=net.num_computers) > net.capacity_array).any():
        raise ValueError("previous home function exceeds capacity")
    zob = zobrist_keys(max(len(prev), 1), net.num_computers, seed)
    cost, new = _kernels.sc_star_kernel(
        prev, table.components(k, l), np.asarray(table.home(k, l), dtype=np.int64),
        net.dist, net.capacity_array, relabel, iterations, tabu_length, zob,
    )
    new = tuple(int(p) for p in new)
    return StitchResult(int(cost), transition_teleports(prev, new, piece[0]), new)


def sc_star(
    prev_home: Sequence[int], table: ZcscTable, piece: tuple[int, int],
    iterations: int = DEFAULT_STITCH_ITERATIONS, tabu_length: int = DEFAULT_TABU_LENGTH,
    seed: int | None = 0,
) -> StitchResult:
    """Recompute the piece's home function to stay close to ``prev_home``.

    Each connected component of the piece is one group.  Two groups attract
    each other by the number of their qubit pairs sharing a computer under
    ``prev_home``, and each group pays the distance its qubits travel.  The
    grouped tabu search, started from a greedy placement near ``prev_home``,
    minimises the sum.
    """
    return _star(prev_home, table, piece, False, iterations, tabu_length, seed)


def scb_star(
    prev_home: Sequence[int], table: ZcscTable, piece: tuple[int, int],
    iterations: int = DEFAULT_STITCH_ITERATIONS, tabu_length: int = DEFAULT_TABU_LENGTH,
    seed: int | None = 0,
) -> StitchResult:
    """:func:`sc_star` followed by the best relabelling against ``prev_home``."""
    _require_uniform(table.network, "scb-star")
    return _star(prev_home, table, piece, True, iterations, tabu_length, seed)


@dataclass
class DivisionResult:
    """A division of the circuit and the schedule it induces.

    ``boundaries`` are even instants from 0 to the last instant; ``homes``
    holds one home function per piece.  ``cost`` is the schedule's cost.
    """

    schedule: Schedule
    cost: int
    boundaries: list[int]
    homes: list[HomeFunction] = field(default_factory=list)


def _result(table: ZcscTable, bounds: list[int], homes: list[Sequence[int]]) -> DivisionResult:
    homes = [tuple(int(p) for p in h) for h in homes]
    teleports: list[Teleportation] = []
    for b, prev, new in zip(bounds[1:-1], homes, homes[1:]):
        teleports += transition_teleports(prev, new, table.boundary_instant(b))
    sched = Schedule(homes[0], teleports)
    cost = sum(int(table.network.dist[tp.source, tp.dest]) for tp in teleports)
    return DivisionResult(sched, cost, [table.boundary_instant(b) for b in bounds], homes)


def _trivial(table: ZcscTable) -> DivisionResult | None:
    if table.num_binary:
        return None
    return DivisionResult(Schedule(table.empty_home), 0, [0, table.circuit.last_instant], [table.empty_home])


def simple_dp(table: ZcscTable, stitch: str = "sc") -> DivisionResult:
    """Cheapest division using the table's precomputed home functions.

    With ``"scb"`` each stitch is scored after relabelling, and the schedule
    relabels every piece against the one actually placed before it.
    """
    if stitch not in ("sc", "scb"):
        raise ValueError("simple_dp stitches with 'sc' or 'scb'")
    relabel = stitch == "scb"
    if relabel:
        _require_uniform(table.network, "scb")
    trivial = _trivial(table)
    if trivial:
        return trivial
    cost, bounds = _kernels.simple_dp(table.ends, table.base, table.homes, table.network.dist, relabel)
    if not bounds:
        raise InfeasibleInstanceError("the circuit cannot be covered by zero-cost pieces")
    homes = [table.homes[table._pid(a, b)] for a, b in zip(bounds, bounds[1:])]
    if relabel:
        placed = [np.asarray(homes[0])]
        for h in homes[1:]:
            perm = _relabel_perm(placed[-1], np.asarray(h), table.network.dist)
            placed.append(perm[h])
        homes = placed
    return _result(table, bounds, homes)


def improved_dp(
    table: ZcscTable,
    stitch: str = "scb-star",
    iterations: int = DEFAULT_STITCH_ITERATIONS,
    tabu_length: int = DEFAULT_TABU_LENGTH,
    seed: int | None = 0,
) -> DivisionResult:
    """Division where each piece's home is recomputed against its predecessor's.

    Every cell keeps the home function chosen for its last piece, and a
    candidate predecessor is only tried while its cost plus a lower bound on
    the stitch can still beat the best found.
    """
    if stitch not in ("sc-star", "scb-star"):
        raise ValueError("improved_dp stitches with 'sc-star' or 'scb-star'")
    relabel = stitch == "scb-star"
    if relabel:
        _require_uniform(table.network, "scb-star")
    trivial = _trivial(table)
    if trivial:
        return trivial
    net = table.network
    zob = zobrist_keys(table.circuit.num_qubits, net.num_computers, seed)
    cost, bounds, chain = _kernels.improved_dp(
        table.ends, table.base, table.homes, table.labels, net.dist, net.capacity_array,
        relabel, iterations, tabu_length, zob,
    )
    if not bounds:
        raise InfeasibleInstanceError("the circuit cannot be covered by zero-cost pieces")
    res = _result(table, bounds, list(chain))
    assert res.cost == cost
    return res


def zero_stitching(
    c: Circuit,
    net: Network,
    dp: str = "improved",
    stitch: str = "scb-star",
    packing: str = "ffd",
    iterations: int = DEFAULT_STITCH_ITERATIONS,
    tabu_length: int = DEFAULT_TABU_LENGTH,
    seed: int | None = 0,
    table: ZcscTable | None = None,
) -> Schedule:
    """End-to-end Zero-Stitching schedule (defaults: improved DP with SCB*)."""
    if dp not in DPS or stitch not in STITCHES:
        raise ValueError(f"dp must be one of {DPS} and stitch one of {STITCHES}")
    star = stitch.endswith("-star")
    if (dp == "simple") == star:
        raise ValueError(f"the {dp} DP does not take stitch {stitch!r}")
    if table is None:
        table = detect_zcsc(c, net, packing)
    if dp == "simple":
        return simple_dp(table, stitch).schedule
    return improved_dp(table, stitch, iterations, tabu_length, seed).schedule
