import pytest

from qdistrib.circuit import Circuit
from qdistrib.placement import (
    BruteForceLimits,
    InfeasibleInstanceError,
    Schedule,
    ScheduleError,
    Teleportation,
    brute_force_optimal,
    parse_schedule,
    replay,
    schedule_cost,
    serialize_schedule,
    teleports_from_homes,
    transition_teleports,
    verify,
)

from helpers import complete_network, path_network, tiny_instance


def example_instance():
    """Four qubits on two computers of capacity three, five single-hop teleports."""
    c = Circuit.from_ops(4, [(0, 2), (1, 3), (0, 3), (1, 2), (0, 1)])
    net = complete_network([3, 3])
    s = Schedule(
        (0, 0, 1, 1),
        [
            Teleportation(2, 1, 0, 0),
            Teleportation(1, 0, 1, 2),
            Teleportation(3, 1, 0, 4),
            Teleportation(2, 0, 1, 6),
            Teleportation(1, 1, 0, 8),
        ],
    )
    return c, net, s


def test_replay_without_teleports_is_initial():
    s = Schedule((0, 1, 1))
    assert replay(s, 0) == (0, 1, 1)
    assert replay(s, 9) == (0, 1, 1)


def test_single_event_replay():
    s = Schedule((0,), [Teleportation(0, 0, 1, 2)])
    assert replay(s, 1) == (0,)
    assert replay(s, 2) == (1,)


def test_replay_example_valid_at_every_instant():
    c, net, s = example_instance()
    for t in range(c.last_instant + 1):
        replay(s, t, net)
    assert verify(s, c, net) == []
    assert schedule_cost(s, net) == 5


def test_replay_source_mismatch_raises():
    s = Schedule((0,), [Teleportation(0, 1, 0, 2)])
    with pytest.raises(ScheduleError):
        replay(s, 2)


def test_replay_capacity_overflow_raises():
    s = Schedule((0, 1), [Teleportation(1, 1, 0, 2)])
    with pytest.raises(ScheduleError):
        replay(s, 2, complete_network([1, 1]))


def test_schedule_cost():
    assert schedule_cost(Schedule((0,)), complete_network([1, 1])) == 0
    s = Schedule((0,), [Teleportation(0, 0, 2, 2)])
    assert schedule_cost(s, path_network([1, 1, 1])) == 2


def test_verify_flags_non_local_gate():
    c = Circuit.from_ops(2, [(0,), (0, 1)])
    (v,) = verify(Schedule((0, 1)), c, complete_network([2, 2]))
    assert v.kind == "non-local-gate" and v.time == 3


def test_verify_flags_capacity_with_node_and_instant():
    c = Circuit.from_ops(4, [(0,), (1,)])
    s = Schedule((0, 0, 0, 1), [Teleportation(3, 1, 0, 2)])
    found = verify(s, c, complete_network([3, 3]))
    assert {v.kind for v in found} == {"capacity"}
    v = found[0]
    assert v.time == 2
    assert "computer 0" in v.detail


def test_verify_flags_odd_instant_and_source_mismatch():
    c = Circuit.from_ops(2, [(0,), (1,)])
    net = complete_network([2, 2])
    kinds = {v.kind for v in verify(Schedule((0, 0), [Teleportation(0, 0, 1, 1)]), c, net)}
    assert "odd-instant" in kinds
    kinds = {v.kind for v in verify(Schedule((0, 0), [Teleportation(0, 1, 0, 2)]), c, net)}
    assert "source-mismatch" in kinds


def test_verify_batch_checked_on_post_state():
    # a swap through a full node is fine once the batch completes
    c = Circuit.from_ops(2, [(0,), (1,)])
    s = Schedule((0, 1), [Teleportation(1, 1, 0, 2), Teleportation(0, 0, 1, 2)])
    assert verify(s, c, complete_network([1, 1])) == []


def test_verify_malformed_initial():
    c = Circuit.from_ops(2, [(0, 1)])
    (v,) = verify(Schedule((0,)), c, complete_network([2]))
    assert v.kind == "malformed"


def test_schedule_round_trip():
    _, _, s = example_instance()
    assert parse_schedule(serialize_schedule(s)) == s


@pytest.mark.parametrize("text", ["init 0 0\ninit 0 1\n", "init 1 0\n", "tp 0 1 2\n", "init a 0\n"])
def test_schedule_parse_errors(text):
    with pytest.raises(ValueError):
        parse_schedule(text)


def test_transition_teleports():
    assert transition_teleports((0, 1, 1), (0, 0, 2), 4) == [
        Teleportation(1, 1, 0, 4),
        Teleportation(2, 1, 2, 4),
    ]
    tps = teleports_from_homes([(2, (1, 1)), (4, (1, 0))], (0, 1))
    assert tps == [Teleportation(0, 0, 1, 2), Teleportation(1, 1, 0, 4)]


def test_brute_force_all_local_is_zero():
    c = Circuit.from_ops(4, [(0, 1), (2, 3), (1, 0)])
    _, cost = brute_force_optimal(c, complete_network([2, 2]))
    assert cost == 0


def test_brute_force_three_qubit_example():
    c = Circuit.from_ops(3, [(0, 1), (1, 2), (0, 1)])
    net = complete_network([2, 2])
    s, cost = brute_force_optimal(c, net)
    assert cost == 2
    assert verify(s, c, net) == []
    assert schedule_cost(s, net) == 2


def test_brute_force_infeasible_and_limits():
    c = Circuit.from_ops(2, [(0, 1)])
    with pytest.raises(InfeasibleInstanceError):
        brute_force_optimal(c, complete_network([1]))
    with pytest.raises(ValueError):
        brute_force_optimal(Circuit.from_ops(6, [(0, 1)]), complete_network([3, 3]))
    with pytest.raises(InfeasibleInstanceError):
        # a binary gate cannot be local on unit-capacity computers
        brute_force_optimal(c, complete_network([1, 1]))


@pytest.mark.parametrize("seed", range(15))
def test_brute_force_schedules_verify(seed):
    c, net = tiny_instance(seed)
    s, cost = brute_force_optimal(c, net, BruteForceLimits())
    assert verify(s, c, net) == []
    assert schedule_cost(s, net) == cost
