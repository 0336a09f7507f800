"""Quantum circuits as ordered gate lists.

Gates sit at odd time instants (gate ``i`` at ``2*i + 1``); the even instants
between them, plus ``0`` and ``2*N_g``, are reserved for teleportations.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple, TextIO

import numpy as np

__all__ = [
    "Gate",
    "Circuit",
    "CircuitFormatError",
    "parse_circuit",
    "load_circuit",
    "serialize_circuit",
    "generate_random_circuit",
    "binary_gates",
]

UNARY = "U"
BINARY = "CX"


class CircuitFormatError(ValueError):
    """Raised for malformed circuit text; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class Gate(NamedTuple):
    qubits: tuple[int, ...]
    time: int

    @property
    def is_binary(self) -> bool:
        return len(self.qubits) == 2

    @property
    def kind(self) -> str:
        return "Binary" if self.is_binary else "Unary"


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    gates: tuple[Gate, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.num_qubits < 0:
            raise ValueError("num_qubits must be non-negative")
        gates = tuple(self.gates)
        object.__setattr__(self, "gates", gates)
        for i, g in enumerate(gates):
            if g.time != 2 * i + 1:
                raise ValueError(f"gate {i} has time {g.time}, expected {2 * i + 1}")
            if len(g.qubits) not in (1, 2):
                raise ValueError(f"gate {i} must have one or two operands")
            if any(q < 0 or q >= self.num_qubits for q in g.qubits):
                raise ValueError(f"gate {i} operand out of range")
            if len(g.qubits) == 2 and g.qubits[0] == g.qubits[1]:
                raise ValueError(f"gate {i} has identical operands")

    @classmethod
    def from_ops(cls, num_qubits: int, ops: Iterable[Iterable[int]]) -> "Circuit":
        """Build a circuit from operand tuples, assigning odd time instants."""
        gates = tuple(Gate(tuple(int(q) for q in op), 2 * i + 1) for i, op in enumerate(ops))
        return cls(num_qubits, gates)

    @property
    def num_gates(self) -> int:
        return len(self.gates)

    @property
    def last_instant(self) -> int:
        return 2 * len(self.gates)

    @cached_property
    def binary_pairs(self) -> np.ndarray:
        """``(B, 2)`` int64 array of binary-gate operands in circuit order."""
        pairs = [g.qubits for g in self.gates if g.is_binary]
        return np.array(pairs, dtype=np.int64).reshape(len(pairs), 2)

    @cached_property
    def binary_times(self) -> np.ndarray:
        return np.array([g.time for g in self.gates if g.is_binary], dtype=np.int64)

    def __str__(self) -> str:
        return serialize_circuit(self)


def binary_gates(c: Circuit) -> list[Gate]:
    return [g for g in c.gates if g.is_binary]


def parse_circuit(text: str | TextIO) -> Circuit:
    """Parse the line-oriented circuit format.

    ``qubits <N>`` must come first; then ``U <q>`` or ``CX <q1> <q2>`` per
    line.  Any other gate name is accepted and classified by its arity.
    ``#`` starts a comment.
    """
    stream = io.StringIO(text) if isinstance(text, str) else text
    num_qubits = None
    ops: list[tuple[int, ...]] = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        head = parts[0]
        if num_qubits is None:
            if head.lower() != "qubits" or len(parts) != 2:
                raise CircuitFormatError("expected header 'qubits <N>'", lineno)
            num_qubits = _parse_int(parts[1], lineno)
            if num_qubits < 0:
                raise CircuitFormatError("qubit count must be non-negative", lineno)
            continue
        if head.lower() == "qubits":
            raise CircuitFormatError("duplicate 'qubits' header", lineno)
        args = [_parse_int(p, lineno) for p in parts[1:]]
        if len(args) not in (1, 2):
            raise CircuitFormatError(f"gate {head!r} needs one or two operands", lineno)
        if head.upper() == UNARY and len(args) != 1:
            raise CircuitFormatError("U takes exactly one operand", lineno)
        if head.upper() == BINARY and len(args) != 2:
            raise CircuitFormatError("CX takes exactly two operands", lineno)
        for q in args:
            if q < 0 or q >= num_qubits:
                raise CircuitFormatError(f"operand {q} outside 0..{num_qubits - 1}", lineno)
        if len(args) == 2 and args[0] == args[1]:
            raise CircuitFormatError("binary gate with identical operands", lineno)
        ops.append(tuple(args))
    if num_qubits is None:
        raise CircuitFormatError("missing 'qubits <N>' header")
    return Circuit.from_ops(num_qubits, ops)


def _parse_int(token: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise CircuitFormatError(f"not an integer: {token!r}", lineno) from None


def serialize_circuit(c: Circuit) -> str:
    lines = [f"qubits {c.num_qubits}"]
    for g in c.gates:
        if g.is_binary:
            lines.append(f"{BINARY} {g.qubits[0]} {g.qubits[1]}")
        else:
            lines.append(f"{UNARY} {g.qubits[0]}")
    return "\n".join(lines) + "\n"


def load_circuit(path) -> Circuit:
    with open(path, encoding="utf-8") as fh:
        return parse_circuit(fh)


def generate_random_circuit(
    num_qubits: int,
    gates_per_qubit: int,
    binary_fraction: float,
    seed: int,
) -> Circuit:
    """Random circuit with ``num_qubits * gates_per_qubit`` gates.

    Each gate is binary with probability ``binary_fraction``; operands are
    uniform (an unordered distinct pair for binary gates).
    """
    if not 0.0 <= binary_fraction <= 1.0:
        raise ValueError("binary_fraction must lie in [0, 1]")
    if num_qubits < 1:
        raise ValueError("num_qubits must be positive")
    if num_qubits < 2 and binary_fraction > 0:
        raise ValueError("binary gates need at least two qubits")
    rng = np.random.default_rng(seed)
    n = num_qubits * gates_per_qubit
    is_binary = rng.random(n) < binary_fraction
    ops: list[tuple[int, ...]] = []
    for b in is_binary:
        if b:
            q1, q2 = rng.choice(num_qubits, size=2, replace=False)
            ops.append((int(q1), int(q2)))
        else:
            ops.append((int(rng.integers(num_qubits)),))
    return Circuit.from_ops(num_qubits, ops)
