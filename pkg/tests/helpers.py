"""Instance builders shared by the tests."""

import numpy as np

from qdistrib.circuit import Circuit, generate_random_circuit
from qdistrib.network import build_network, default_capacities, generate_random_network


def complete_network(caps):
    n = len(caps)
    return build_network(caps, [(a, b) for a in range(n) for b in range(a + 1, n)])


def path_network(caps):
    return build_network(caps, [(i, i + 1) for i in range(len(caps) - 1)])


def random_instance(nq, gpq, f, npc, link=1.0, seed=0, caps=None):
    c = generate_random_circuit(nq, gpq, f, seed)
    caps = default_capacities(nq, npc) if caps is None else caps
    return c, generate_random_network(npc, link, caps, seed + 1000)


def tiny_instance(seed, max_qubits=4, max_binary=5):
    """At most ``max_qubits`` qubits, 2-3 computers, at most ``max_binary`` binary gates."""
    rng = np.random.default_rng(seed)
    nq = int(rng.integers(2, max_qubits + 1))
    npc = int(rng.integers(2, 4))
    nb = int(rng.integers(1, max_binary + 1))
    ops = []
    while sum(len(o) == 2 for o in ops) < nb:
        if rng.random() < 0.3:
            ops.append((int(rng.integers(nq)),))
        else:
            a, b = rng.choice(nq, 2, replace=False)
            ops.append((int(a), int(b)))
    c = Circuit.from_ops(nq, ops)
    net = generate_random_network(npc, float(rng.choice([0.5, 1.0])), default_capacities(nq, npc), seed)
    return c, net
