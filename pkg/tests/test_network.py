import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdistrib.network import (
    NetworkFormatError,
    build_network,
    default_capacities,
    generate_random_network,
    parse_network,
    serialize_network,
)

from helpers import complete_network, path_network


def test_complete_graph_distances_are_one():
    net = complete_network([3] * 8)
    off = net.dist[~np.eye(8, dtype=bool)]
    assert (off == 1).all()
    assert (net.dist.diagonal() == 0).all()


def test_single_node():
    net = build_network([4], [])
    assert net.dist.tolist() == [[0]]


def test_path_distance():
    net = path_network([2, 2, 2])
    assert net.dist[0, 2] == 2
    assert net.dist[2, 0] == 2


def test_distances_are_read_only():
    net = path_network([2, 2])
    with pytest.raises(ValueError):
        net.dist[0, 1] = 5


@pytest.mark.parametrize(
    "caps, edges",
    [
        ([], []),
        ([2, 0], [(0, 1)]),
        ([2, 2], [(0, 0)]),
        ([2, 2], [(0, 2)]),
        ([2, 2, 2], [(0, 1)]),  # disconnected
    ],
)
def test_invalid_networks_rejected(caps, edges):
    with pytest.raises(ValueError):
        build_network(caps, edges)


def test_generator_full_probability_is_complete():
    net = generate_random_network(6, 1.0, [2] * 6, seed=3)
    assert len(net.edges) == 15


def test_generator_two_nodes_always_one_edge():
    net = generate_random_network(2, 0.1, [1, 1], seed=0)
    assert net.edges == frozenset({(0, 1)})


def test_generator_is_connected_and_deterministic():
    for seed in range(10):
        net = generate_random_network(8, 0.3, [3] * 8, seed)
        assert (net.dist >= 0).all()
        assert net == generate_random_network(8, 0.3, [3] * 8, seed)


def test_generator_rejects_bad_arguments():
    with pytest.raises(ValueError):
        generate_random_network(3, 1.5, [1] * 3, 0)
    with pytest.raises(ValueError):
        generate_random_network(3, 0.5, [1] * 2, 0)


@pytest.mark.parametrize(
    "nq, npc, expected",
    [(50, 8, [8] * 8), (8, 8, [2] * 8), (7, 2, [5, 5])],
)
def test_default_capacities(nq, npc, expected):
    assert default_capacities(nq, npc) == expected


def test_uniformity_and_hosting():
    net = complete_network([3, 3, 4])
    assert not net.is_uniform
    assert net.total_capacity == 10
    assert net.can_host(10) and not net.can_host(11)


@pytest.mark.parametrize(
    "text, line",
    [
        ("cap 0 1\n", 1),
        ("computers 2\ncap 0 1\ncap 0 2\n", 3),
        ("computers 2\ncap 3 1\n", 2),
        ("computers 2\ncap 0 x\n", 2),
        ("computers 2\nlink 0 1\n", 2),
    ],
)
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(NetworkFormatError) as err:
        parse_network(text)
    assert err.value.line == line


def test_parse_missing_capacity():
    with pytest.raises(NetworkFormatError):
        parse_network("computers 2\ncap 0 1\nedge 0 1\n")


@given(st.integers(1, 7), st.floats(0.5, 1.0), st.integers(0, 1000))
@settings(max_examples=50, deadline=None)
def test_serialize_round_trip(n, p, seed):
    net = generate_random_network(n, p, [1 + (i % 3) for i in range(n)], seed)
    back = parse_network(serialize_network(net))
    assert back == net
    assert (back.dist == net.dist).all()
