"""Quantum networks: computers with storage capacities joined by links."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence, TextIO

import networkx as nx
import numpy as np

__all__ = [
    "Network",
    "NetworkFormatError",
    "build_network",
    "generate_random_network",
    "default_capacities",
    "parse_network",
    "load_network",
    "serialize_network",
]

MAX_CONNECT_RETRIES = 1000


class NetworkFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class Network:
    """Immutable network; ``dist`` holds all-pairs hop counts."""

    capacities: tuple[int, ...]
    edges: frozenset[tuple[int, int]]
    dist: np.ndarray

    @property
    def num_computers(self) -> int:
        return len(self.capacities)

    @cached_property
    def capacity_array(self) -> np.ndarray:
        return np.asarray(self.capacities, dtype=np.int64)

    @property
    def total_capacity(self) -> int:
        return sum(self.capacities)

    @property
    def is_uniform(self) -> bool:
        return len(set(self.capacities)) <= 1

    def can_host(self, num_qubits: int) -> bool:
        """Whether the summed storage fits ``num_qubits`` (necessary for feasibility)."""
        return self.total_capacity >= num_qubits

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return self.capacities == other.capacities and self.edges == other.edges

    def __hash__(self):
        return hash((self.capacities, self.edges))


def _norm_edge(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


def build_network(capacities: Sequence[int], edges: Iterable[tuple[int, int]]) -> Network:
    caps = tuple(int(c) for c in capacities)
    n = len(caps)
    if n == 0:
        raise ValueError("network needs at least one computer")
    if any(c < 1 for c in caps):
        raise ValueError("capacities must be >= 1")
    edge_set = set()
    for a, b in edges:
        a, b = int(a), int(b)
        if not (0 <= a < n and 0 <= b < n):
            raise ValueError(f"edge ({a}, {b}) has an invalid endpoint")
        if a == b:
            raise ValueError(f"self-loop on computer {a}")
        edge_set.add(_norm_edge(a, b))
    g = nx.Graph()
    g.add_nodes_from(range(n))
    g.add_edges_from(edge_set)
    if not nx.is_connected(g):
        raise ValueError("network graph is disconnected")
    dist = np.zeros((n, n), dtype=np.int64)
    for src, lengths in nx.all_pairs_shortest_path_length(g):
        for dst, d in lengths.items():
            dist[src, dst] = d
    dist.setflags(write=False)
    return Network(caps, frozenset(edge_set), dist)


def generate_random_network(
    num_computers: int,
    edge_probability: float,
    capacities: Sequence[int],
    seed: int,
) -> Network:
    """Connected Erdos-Renyi network; disconnected samples are redrawn."""
    if num_computers < 1:
        raise ValueError("num_computers must be >= 1")
    if not 0.0 <= edge_probability <= 1.0:
        raise ValueError("edge_probability must lie in [0, 1]")
    if len(capacities) != num_computers:
        raise ValueError("one capacity per computer required")
    rng = np.random.default_rng(seed)
    for _ in range(MAX_CONNECT_RETRIES):
        g = nx.gnp_random_graph(num_computers, edge_probability, seed=int(rng.integers(2**31)))
        if nx.is_connected(g):
            return build_network(capacities, g.edges())
    raise RuntimeError(
        f"no connected G({num_computers}, {edge_probability}) after {MAX_CONNECT_RETRIES} draws"
    )


def default_capacities(num_qubits: int, num_computers: int) -> list[int]:
    if num_qubits < 1 or num_computers < 1:
        raise ValueError("num_qubits and num_computers must be >= 1")
    return [math.ceil(num_qubits / num_computers) + 1] * num_computers


def parse_network(text: str | TextIO) -> Network:
    """Parse ``computers <N>`` / ``cap <p> <s>`` / ``edge <a> <b>`` lines."""
    stream = io.StringIO(text) if isinstance(text, str) else text
    n = None
    caps: dict[int, int] = {}
    edges = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            vals = [int(p) for p in parts[1:]]
        except ValueError:
            raise NetworkFormatError("non-integer field", lineno) from None
        key = parts[0].lower()
        if n is None:
            if key != "computers" or len(vals) != 1:
                raise NetworkFormatError("expected header 'computers <N>'", lineno)
            n = vals[0]
            continue
        if key == "cap" and len(vals) == 2:
            p, s = vals
            if not 0 <= p < n:
                raise NetworkFormatError(f"computer {p} out of range", lineno)
            if p in caps:
                raise NetworkFormatError(f"duplicate capacity for computer {p}", lineno)
            caps[p] = s
        elif key == "edge" and len(vals) == 2:
            edges.append((vals[0], vals[1]))
        else:
            raise NetworkFormatError(f"unrecognised line {line!r}", lineno)
    if n is None:
        raise NetworkFormatError("missing 'computers <N>' header")
    missing = [p for p in range(n) if p not in caps]
    if missing:
        raise NetworkFormatError(f"no capacity given for computers {missing}")
    return build_network([caps[p] for p in range(n)], edges)


def serialize_network(net: Network) -> str:
    lines = [f"computers {net.num_computers}"]
    lines += [f"cap {p} {s}" for p, s in enumerate(net.capacities)]
    lines += [f"edge {a} {b}" for a, b in sorted(net.edges)]
    return "\n".join(lines) + "\n"


def load_network(path) -> Network:
    with open(path, encoding="utf-8") as fh:
        return parse_network(fh)
