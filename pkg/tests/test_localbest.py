import numpy as np
import pytest

from qdistrib.circuit import Circuit
from qdistrib.localbest import (
    LookaheadIndex,
    benefit,
    choose_computer,
    eviction_destination,
    local_best,
    preference_order,
    select_evictions,
)
from qdistrib.placement import InfeasibleInstanceError, schedule_cost, verify

from helpers import complete_network, path_network, random_instance
from oracles import benefit_oracle, eviction_oracle


def hand_instance():
    """Six qubits on three computers; gate 0 is CX(0, 3), non-local."""
    c = Circuit.from_ops(
        6,
        [(0, 3), (0, 1), (3, 4), (0, 3), (2,), (3, 5), (0, 2), (1, 4), (3, 1), (0, 5)],
    )
    home = [0, 0, 1, 1, 2, 2]
    return c, home


def _loads(home, n):
    return list(np.bincount(home, minlength=n))


@pytest.mark.parametrize("r", [1, 2, 3, 5])
@pytest.mark.parametrize("caps", [[2, 2, 2], [3, 2, 2], [2, 3, 4], [4, 4, 4]])
def test_benefit_matches_formula_oracle(r, caps):
    c, home = hand_instance()
    idx = LookaheadIndex(c)
    loads = _loads(home, 3)
    for p in range(3):
        assert benefit(0, p, home, loads, caps, idx, r) == benefit_oracle(c, 0, p, home, caps, r)


@pytest.mark.parametrize("seed", range(20))
def test_benefit_matches_oracle_on_random_states(seed):
    c, net = random_instance(8, 8, 0.7, 3, seed=seed)
    rng = np.random.default_rng(seed)
    home = list(rng.permutation(np.arange(8) % 3))
    caps = [4, 4, 4]
    idx = LookaheadIndex(c)
    for k in rng.choice(len(idx.pairs), 5, replace=False):
        for p in range(3):
            r = int(rng.integers(1, 6))
            got = benefit(int(k), p, home, _loads(home, 3), caps, idx, r)
            assert got == benefit_oracle(c, int(k), p, home, caps, r)


def test_benefit_gaps_term():
    c, home = hand_instance()
    idx = LookaheadIndex(c)
    # computer 2 hosts neither operand and is full: two slots must be freed
    caps = [2, 2, 2]
    b = benefit(0, 2, home, _loads(home, 3), caps, idx, 3)
    no_gaps = benefit(0, 2, home, _loads(home, 3), [2, 2, 4], idx, 3)
    assert no_gaps - b == 2 * 3


def test_choose_computer_is_argmax():
    c, home = hand_instance()
    idx = LookaheadIndex(c)
    for caps in ([2, 2, 2], [3, 3, 3], [2, 3, 4]):
        scores = [benefit_oracle(c, 0, p, home, caps, 3) for p in range(3)]
        p = choose_computer(0, home, _loads(home, 3), caps, idx, 3)
        assert scores[p] == max(scores)


def test_choose_computer_prefers_host_on_ties():
    # nothing after the gate: every benefit is zero given free space
    c = Circuit.from_ops(3, [(1, 2)])
    idx = LookaheadIndex(c)
    home = [0, 1, 2]
    assert choose_computer(0, home, [1, 1, 1], [3, 3, 3], idx, 5) == 1


def test_choose_computer_needs_room_for_both():
    c = Circuit.from_ops(2, [(0, 1)])
    with pytest.raises(InfeasibleInstanceError):
        choose_computer(0, [0, 1], [1, 1], [1, 1], LookaheadIndex(c), 1)


def test_eviction_prefers_idle_resident():
    weight = {(1, 5): 2, (2, 5): 1}
    assert select_evictions([1, 2, 3], [5], 1, weight) == (3,)


def test_eviction_ties_go_to_lowest_index():
    assert select_evictions([4, 2, 7], [0], 1, {}) == (2,)
    assert select_evictions([4, 2, 7, 1], [0], 2, {}) == (1, 2)


@pytest.mark.parametrize("seed", range(30))
def test_eviction_pair_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    residents = [int(q) for q in rng.choice(10, 4, replace=False)]
    keep = [10, 11]
    members = residents + keep
    weight = {}
    for i, a in enumerate(members):
        for b in members[i + 1:]:
            if rng.random() < 0.6:
                weight[(min(a, b), max(a, b))] = int(rng.integers(1, 4))

    def pw(a, b):
        return weight.get((min(a, b), max(a, b)), 0)

    for need in (1, 2):
        assert select_evictions(residents, keep, need, weight) == eviction_oracle(residents, keep, need, pw)


def test_preference_order():
    # qubit 0's next gates are with 2 (on computer 2) then 1 (on computer 1)
    c = Circuit.from_ops(4, [(0, 3), (0, 2), (0, 2), (0, 1)])
    idx = LookaheadIndex(c)
    home = [0, 1, 2, 0]
    net = path_network([4, 4, 4])
    assert preference_order(0, 0, home, net, idx, 5) == [2, 1, 0]
    assert preference_order(0, 0, home, net, idx, 1) == [2, 0, 1]
    # no future gates: nearest first, then index
    assert preference_order(3, 0, home, net, idx, 5) == [0, 1, 2]


def test_eviction_destination():
    c = Circuit.from_ops(4, [(0, 3), (1, 2)])
    idx = LookaheadIndex(c)
    home = [0, 0, 1, 2]
    net = path_network([2, 2, 2])
    # qubit 1's partner sits on 1, which has room
    assert eviction_destination(1, 0, home, [2, 1, 1], net, idx, 5, exclude=0) == 1
    # without room there it goes to the next free computer
    assert eviction_destination(1, 0, home, [2, 2, 1], net, idx, 5, exclude=0) == 2
    # no future gates: full tie resolved by distance, then index
    complete = complete_network([2, 2, 2])
    assert eviction_destination(3, 1, home, [2, 1, 1], complete, idx, 5, exclude=0) == 1


def test_single_gate_costs_one():
    c = Circuit.from_ops(2, [(0, 1)])
    net = complete_network([2, 2])
    s = local_best(c, net, initial=[0, 1])
    assert schedule_cost(s, net) == 1
    assert s.num_teleports == 1
    assert s.teleports[0].time == 0


def test_all_local_start_costs_nothing():
    c = Circuit.from_ops(4, [(0, 1), (2, 3), (1, 0), (3,)])
    net = complete_network([2, 2])
    s = local_best(c, net)
    assert s.num_teleports == 0
    assert verify(s, c, net) == []


def test_teleports_sit_just_before_their_gate():
    c, net = random_instance(12, 10, 0.6, 3, link=0.5, seed=4)
    s = local_best(c, net, seed=4)
    gate_times = set(c.binary_times.tolist())
    assert all(tp.time + 1 in gate_times for tp in s.teleports)


@pytest.mark.parametrize("seed", range(12))
def test_schedules_are_valid(seed):
    rng = np.random.default_rng(seed)
    nq, npc = int(rng.integers(6, 30)), int(rng.integers(2, 7))
    c, net = random_instance(nq, 10, float(rng.uniform(0.2, 0.9)), npc, link=float(rng.uniform(0.3, 1)), seed=seed)
    s = local_best(c, net, lookahead=int(rng.integers(1, 7)), seed=seed)
    assert verify(s, c, net) == []


def test_tight_capacity_is_valid():
    # total capacity equals the qubit count, so every move forces evictions
    c, _ = random_instance(9, 10, 0.8, 3, seed=2)
    net = complete_network([3, 3, 3])
    s = local_best(c, net, seed=2)
    assert verify(s, c, net) == []


def test_bad_arguments():
    c = Circuit.from_ops(3, [(0, 1)])
    with pytest.raises(ValueError):
        local_best(c, complete_network([3]), lookahead=0)
    with pytest.raises(InfeasibleInstanceError):
        local_best(c, complete_network([1, 1]))
