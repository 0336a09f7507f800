"""Home-computer functions, teleportation schedules and their verifier.

A schedule is an initial assignment (the home function at instant 0) plus
teleportations at even instants.  Several teleports may share an instant;
they are applied in list order and capacity is checked on the state after
the whole batch.
"""

from __future__ import annotations

import io
import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence, TextIO

import numpy as np

from .circuit import Circuit
from .network import Network

__all__ = [
    "HomeFunction",
    "Teleportation",
    "Schedule",
    "Violation",
    "ScheduleError",
    "InfeasibleInstanceError",
    "NonUniformCapacityError",
    "BruteForceLimits",
    "is_capacity_valid",
    "replay",
    "schedule_cost",
    "verify",
    "transition_teleports",
    "brute_force_optimal",
    "parse_schedule",
    "serialize_schedule",
    "load_schedule",
    "teleports_from_homes",
]

HomeFunction = tuple[int, ...]


class ScheduleError(ValueError):
    """An inconsistent schedule was replayed."""


class InfeasibleInstanceError(ValueError):
    """The instance admits no solution (or exceeds an algorithm's assumptions)."""


class NonUniformCapacityError(InfeasibleInstanceError):
    """The algorithm requires every computer to have the same capacity."""


class Teleportation(NamedTuple):
    qubit: int
    source: int
    dest: int
    time: int


@dataclass
class Schedule:
    initial: HomeFunction
    teleports: list[Teleportation] = field(default_factory=list)

    def __post_init__(self):
        self.initial = tuple(int(p) for p in self.initial)
        self.teleports = [Teleportation(*map(int, tp)) for tp in self.teleports]

    @property
    def num_teleports(self) -> int:
        return len(self.teleports)


class Violation(NamedTuple):
    kind: str  # non-local-gate | capacity | odd-instant | source-mismatch | malformed
    time: int
    detail: str

    def __str__(self):
        return f"t={self.time} {self.kind}: {self.detail}"


def is_capacity_valid(home: Sequence[int], net: Network) -> bool:
    counts = Counter(home)
    return all(0 <= p < net.num_computers and counts[p] <= net.capacities[p] for p in counts)


def _by_time(s: Schedule) -> dict[int, list[Teleportation]]:
    batches: dict[int, list[Teleportation]] = {}
    for tp in s.teleports:
        batches.setdefault(tp.time, []).append(tp)
    return batches


def replay(s: Schedule, t: int, net: Network | None = None) -> HomeFunction:
    """Home function after applying every teleport with ``time <= t``.

    Raises :class:`ScheduleError` on a source mismatch, or, when ``net`` is
    given, on a capacity overflow at any intermediate instant.
    """
    home = list(s.initial)
    batches = _by_time(s)
    if net is not None and not is_capacity_valid(home, net):
        raise ScheduleError("initial assignment exceeds capacity")
    for time in sorted(batches):
        if time > t:
            break
        for tp in batches[time]:
            if home[tp.qubit] != tp.source:
                raise ScheduleError(
                    f"teleport of qubit {tp.qubit} at t={time} from {tp.source}, "
                    f"but it resides on {home[tp.qubit]}"
                )
            home[tp.qubit] = tp.dest
        if net is not None and not is_capacity_valid(home, net):
            raise ScheduleError(f"capacity exceeded at t={time}")
    return tuple(home)


def schedule_cost(s: Schedule, net: Network) -> int:
    return int(sum(net.dist[tp.source, tp.dest] for tp in s.teleports))


def verify(s: Schedule, c: Circuit, net: Network) -> list[Violation]:
    """Every way ``s`` fails to be a valid solution for ``c`` on ``net``."""
    out: list[Violation] = []
    nq, npc = c.num_qubits, net.num_computers
    last = c.last_instant
    if len(s.initial) != nq:
        return [Violation("malformed", 0, f"initial assignment covers {len(s.initial)} of {nq} qubits")]
    home = list(s.initial)
    for q, p in enumerate(home):
        if not 0 <= p < npc:
            return [Violation("malformed", 0, f"qubit {q} assigned to unknown computer {p}")]
    times = [tp.time for tp in s.teleports]
    if times != sorted(times):
        out.append(Violation("malformed", 0, "teleports are not ordered by time"))
    batches = _by_time(s)
    for time in sorted(batches):
        if time < 0 or time > last:
            out.append(Violation("malformed", time, f"teleport time outside 0..{last}"))
        elif time % 2:
            out.append(Violation("odd-instant", time, f"{len(batches[time])} teleport(s) at a gate instant"))

    def check_capacity(t):
        counts = Counter(home)
        for p in sorted(counts):
            if counts[p] > net.capacities[p]:
                out.append(Violation("capacity", t, f"computer {p} holds {counts[p]} > {net.capacities[p]}"))

    for t in range(0, last + 1):
        if t % 2 == 0:
            for tp in batches.get(t, ()):
                if not (0 <= tp.qubit < nq and 0 <= tp.source < npc and 0 <= tp.dest < npc):
                    out.append(Violation("malformed", t, f"teleport {tuple(tp)} has invalid ids"))
                    continue
                if tp.source == tp.dest:
                    out.append(Violation("malformed", t, f"qubit {tp.qubit} teleported onto its own node"))
                if home[tp.qubit] != tp.source:
                    out.append(
                        Violation(
                            "source-mismatch",
                            t,
                            f"qubit {tp.qubit} teleported from {tp.source} but resides on {home[tp.qubit]}",
                        )
                    )
                home[tp.qubit] = tp.dest
            check_capacity(t)
        else:
            gate = c.gates[(t - 1) // 2]
            if gate.is_binary:
                a, b = gate.qubits
                if home[a] != home[b]:
                    out.append(
                        Violation("non-local-gate", t, f"qubits {a}@{home[a]} and {b}@{home[b]}")
                    )
    return out


def transition_teleports(
    before: Sequence[int], after: Sequence[int], time: int
) -> list[Teleportation]:
    """Independent per-qubit teleports turning ``before`` into ``after`` at ``time``."""
    return [
        Teleportation(q, int(a), int(b), time)
        for q, (a, b) in enumerate(zip(before, after))
        if a != b
    ]


@dataclass(frozen=True)
class BruteForceLimits:
    max_qubits: int = 5
    max_computers: int = 3
    max_binary_gates: int = 6


def brute_force_optimal(
    c: Circuit, net: Network, limits: BruteForceLimits = BruteForceLimits()
) -> tuple[Schedule, int]:
    """Exact minimum-cost schedule by shortest path over assignment states.

    States at binary gate ``k`` are capacity-valid assignments making that
    gate local; moving between states costs the per-qubit distance sum.
    Unary gates never constrain the state, so only binary gates are layers.
    """
    nq, npc = c.num_qubits, net.num_computers
    nb = len(c.binary_pairs)
    if nq > limits.max_qubits or npc > limits.max_computers or nb > limits.max_binary_gates:
        raise ValueError(
            f"instance ({nq} qubits, {npc} computers, {nb} binary gates) exceeds brute-force limits"
        )
    if not net.can_host(nq):
        raise InfeasibleInstanceError("total capacity below the number of qubits")
    caps = net.capacity_array
    states = np.array(
        [s for s in itertools.product(range(npc), repeat=nq)
         if np.all(np.bincount(s, minlength=npc) <= caps)],
        dtype=np.int64,
    ).reshape(-1, nq)
    if len(states) == 0:
        raise InfeasibleInstanceError("no capacity-valid assignment exists")
    if nb == 0:
        return Schedule(tuple(states[0])), 0
    # move[i, j] = cost of going from state i to state j
    move = net.dist[states[:, None, :], states[None, :, :]].sum(axis=2)
    layers = []
    for a, b in c.binary_pairs:
        layers.append(np.flatnonzero(states[:, a] == states[:, b]))
    if any(len(layer) == 0 for layer in layers):
        raise InfeasibleInstanceError("some binary gate cannot be made local")
    costs = [np.zeros(len(layers[0]), dtype=np.int64)]
    back = [None]
    for k in range(1, nb):
        prev, cur = layers[k - 1], layers[k]
        total = costs[-1][:, None] + move[np.ix_(prev, cur)]
        arg = total.argmin(axis=0)
        costs.append(total[arg, np.arange(len(cur))])
        back.append(arg)
    idx = int(costs[-1].argmin())
    best = int(costs[-1][idx])
    chain = [idx]
    for k in range(nb - 1, 0, -1):
        idx = int(back[k][idx])
        chain.append(idx)
    chain.reverse()
    path = [states[layers[k][i]] for k, i in enumerate(chain)]
    teleports: list[Teleportation] = []
    for k in range(1, nb):
        teleports += transition_teleports(path[k - 1], path[k], int(c.binary_times[k]) - 1)
    return Schedule(tuple(int(p) for p in path[0]), teleports), best


def serialize_schedule(s: Schedule) -> str:
    lines = [f"init {q} {p}" for q, p in enumerate(s.initial)]
    lines += [f"tp {tp.qubit} {tp.source} {tp.dest} {tp.time}" for tp in s.teleports]
    return "\n".join(lines) + "\n"


def parse_schedule(text: str | TextIO) -> Schedule:
    stream = io.StringIO(text) if isinstance(text, str) else text
    init: dict[int, int] = {}
    teleports = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            vals = [int(v) for v in parts[1:]]
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer field") from None
        if parts[0] == "init" and len(vals) == 2:
            if vals[0] in init:
                raise ValueError(f"line {lineno}: qubit {vals[0]} initialised twice")
            init[vals[0]] = vals[1]
        elif parts[0] == "tp" and len(vals) == 4:
            teleports.append(Teleportation(*vals))
        else:
            raise ValueError(f"line {lineno}: unrecognised line {line!r}")
    if sorted(init) != list(range(len(init))):
        raise ValueError("init lines must cover qubits 0..N-1 exactly once")
    return Schedule(tuple(init[q] for q in range(len(init))), teleports)


def load_schedule(path) -> Schedule:
    with open(path, encoding="utf-8") as fh:
        return parse_schedule(fh)


def teleports_from_homes(
    homes: Iterable[tuple[int, Sequence[int]]], initial: Sequence[int]
) -> list[Teleportation]:
    """Teleports for a sequence of ``(instant, home)`` targets starting at ``initial``."""
    cur = list(initial)
    out: list[Teleportation] = []
    for t, h in homes:
        out += transition_teleports(cur, h, t)
        cur = list(h)
    return out
