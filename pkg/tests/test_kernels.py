"""Compiled and pure-Python kernels must agree exactly."""

import itertools

import numpy as np
import pytest

from qdistrib import _kernels
from qdistrib.tabu import build_weights, zobrist_keys

from helpers import random_instance

BACKENDS = _kernels.backends()
needs_both = pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled extension unavailable or disabled")


def _tabu_case(seed):
    rng = np.random.default_rng(seed)
    G, P = int(rng.integers(2, 14)), int(rng.integers(2, 5))
    sizes = rng.integers(1, 3, G).astype(np.int64)
    W = rng.integers(0, 4, (G, G)).astype(np.int64)
    W = np.triu(W, 1)
    W = W + W.T
    A = rng.integers(0, 3, (G, P)).astype(np.int64) * int(rng.random() < 0.5)
    D = np.ones((P, P), dtype=np.int64) - np.eye(P, dtype=np.int64)
    if rng.random() < 0.5:  # path metric
        D = np.abs(np.subtract.outer(np.arange(P), np.arange(P))).astype(np.int64)
    caps = np.full(P, int(np.ceil(sizes.sum() / P)) + 1, dtype=np.int64)
    assign = np.empty(G, dtype=np.int64)
    load = np.zeros(P, dtype=np.int64)
    for g in range(G):
        p = int(np.argmin(load))
        assign[g] = p
        load[p] += sizes[g]
    zob = zobrist_keys(G, P, seed)
    return sizes, W, A, D, caps, assign, zob


def test_backend_reported():
    assert _kernels.BACKEND in BACKENDS


@pytest.mark.parametrize("seed", range(40))
def test_tabu_kernel_result_is_valid_and_consistent(backend, seed):
    sizes, W, A, D, caps, assign, zob = _tabu_case(seed)
    best, cost = backend.tabu_kernel(sizes, W, A, D, caps, assign, 60, 5, zob)
    best = np.asarray(best)
    assert cost == backend.assignment_cost(W, A, D, best)
    assert cost <= backend.assignment_cost(W, A, D, assign)
    assert (np.bincount(best, weights=sizes, minlength=len(caps)) <= caps).all()


@needs_both
@pytest.mark.parametrize("seed", range(60))
def test_tabu_kernel_backends_agree(seed):
    sizes, W, A, D, caps, assign, zob = _tabu_case(seed)
    out = [b.tabu_kernel(sizes, W, A, D, caps, assign, 60, 5, zob) for b in BACKENDS.values()]
    (a1, c1), (a2, c2) = out
    assert c1 == c2
    assert list(a1) == list(a2)


@pytest.mark.parametrize("seed", range(20))
def test_hungarian_matches_enumeration(backend, seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    cost = rng.integers(0, 10, (n, n)).astype(np.int64)
    perm = np.asarray(backend.hungarian(cost))
    assert sorted(perm) == list(range(n))
    best = min(sum(cost[i, p[i]] for i in range(n)) for p in itertools.permutations(range(n)))
    assert cost[np.arange(n), perm].sum() == best


def test_relabel_prefers_identity_on_ties(backend):
    D = np.ones((3, 3), dtype=np.int64) - np.eye(3, dtype=np.int64)
    prev = np.array([0, 1, 2], dtype=np.int64)
    assert list(backend.relabel_home(prev, prev.copy(), D)) == [0, 1, 2]
    new = np.array([1, 2, 0], dtype=np.int64)
    assert list(backend.relabel_home(prev, new, D)) == [0, 1, 2]


def _dp_inputs(nq, npc, seed, gpq=6):
    c, net = random_instance(nq, gpq, 0.5, npc, seed=seed)
    pairs = np.ascontiguousarray(c.binary_pairs, dtype=np.int64)
    return c, net, pairs, np.asarray(net.capacities, dtype=np.int64)


@needs_both
@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("ffd", [True, False])
def test_zcsc_scan_backends_agree(seed, ffd):
    _, _, pairs, caps = _dp_inputs(10, 3, seed)
    outs = [b.zcsc_scan(pairs, 10, caps, ffd) for b in BACKENDS.values()]
    for x, y in zip(*outs):
        assert np.array_equal(np.asarray(x), np.asarray(y))


@needs_both
@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("relabel", [False, True])
def test_simple_dp_backends_agree(seed, relabel):
    _, net, pairs, caps = _dp_inputs(12, 3, seed)
    ends, base, homes, _ = _kernels.zcsc_scan(pairs, 12, caps, True)
    outs = [b.simple_dp(ends, base, homes, net.dist, relabel) for b in BACKENDS.values()]
    assert outs[0][0] == outs[1][0]
    assert list(outs[0][1]) == list(outs[1][1])


@needs_both
@pytest.mark.parametrize("seed", range(4))
@pytest.mark.parametrize("relabel", [False, True])
def test_improved_dp_backends_agree(seed, relabel):
    _, net, pairs, caps = _dp_inputs(12, 3, seed)
    ends, base, homes, labels = _kernels.zcsc_scan(pairs, 12, caps, True)
    zob = zobrist_keys(12, 3, seed)
    outs = [b.improved_dp(ends, base, homes, labels, net.dist, caps, relabel, 10, 10, zob)
            for b in BACKENDS.values()]
    assert outs[0][0] == outs[1][0]
    assert list(outs[0][1]) == list(outs[1][1])
    assert np.array_equal(np.asarray(outs[0][2]), np.asarray(outs[1][2]))


def test_assignment_cost_matches_weights(backend):
    c, net = random_instance(8, 5, 1.0, 3, link=0.5, seed=2)
    w = build_weights(c)
    home = np.arange(8, dtype=np.int64) % 3
    expected = sum(w[a, b] * net.dist[home[a], home[b]] for a in range(8) for b in range(a + 1, 8))
    A = np.zeros((8, 3), dtype=np.int64)
    assert backend.assignment_cost(w, A, net.dist, home) == expected
