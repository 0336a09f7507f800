"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

These are ensemble runs and take a while on a single core.  Deselect them
with ``-m "not slow"``.  Instances are shared between criteria through a
module-level cache so the default-parameter runs are solved only once.
"""

import os
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import pytest

from qdistrib.algorithms import SolveOptions, solve, variant_options
from qdistrib.bench import DEFAULTS, SWEEPS, make_instance
from qdistrib.circuit import Circuit
from qdistrib.placement import brute_force_optimal, schedule_cost, verify
from qdistrib.tabu import GroupedInstance, build_weights, tabu_search
from qdistrib.zerostitch import detect_zcsc, sc, sc_star, scb, scb_star, simple_dp

from helpers import complete_network, random_instance, tiny_instance
from oracles import capacity_ok, exhaustive_division, piece_is_local, relabel_oracle

pytestmark = pytest.mark.slow

ALL = ("local-best", "zs-sc", "zs-scb", "zs-sc-star", "zs-scb-star", "repeated-bisection")
MAIN = ("local-best", "zs-scb-star", "repeated-bisection")

_cache: dict[tuple, dict[str, tuple[int, int]]] = {}


def report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\nACCEPTANCE {n}: {'PASS' if ok else 'FAIL'} - {detail}")


def _params(**over):
    return {**DEFAULTS, **over}


def _run_cell(args):
    """Solve one instance with several algorithms; returns ``{alg: (cost, violations)}``."""
    params, seed, algorithms = args
    c, net = make_instance(params, seed)
    out = {}
    table = None
    for alg in algorithms:
        name, opts = variant_options(alg, SolveOptions(seed=seed))
        if name == "zero-stitch" and table is None:
            table = detect_zcsc(c, net, opts.packing)
        s = solve(name, c, net, opts, table if name == "zero-stitch" else None)
        out[alg] = (schedule_cost(s, net), len(verify(s, c, net)))
    return out


def solve_cells(cells):
    """Results for ``(params, seed, algorithms)`` cells, reusing earlier runs."""
    todo = []
    for params, seed, algs in cells:
        key = (tuple(sorted(params.items())), seed)
        missing = tuple(a for a in algs if a not in _cache.get(key, {}))
        if missing:
            todo.append((key, (params, seed, missing)))
    workers = os.cpu_count() or 1
    if workers > 1 and len(todo) > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_run_cell, [t[1] for t in todo]))
    else:
        results = [_run_cell(t[1]) for t in todo]
    for (key, _), res in zip(todo, results):
        _cache.setdefault(key, {}).update(res)
    return [_cache[(tuple(sorted(p.items())), s)] for p, s, _ in cells]


def test_1_validity_at_defaults(capsys):
    t0 = time.perf_counter()
    results = solve_cells([(_params(), seed, ALL) for seed in range(200)])
    minutes = (time.perf_counter() - t0) / 60
    bad = [(seed, alg) for seed, r in enumerate(results) for alg, (_, v) in r.items() if v]
    ok = not bad
    report(capsys, 1, ok, f"200 instances x {len(ALL)} algorithms, {len(bad)} invalid schedules, "
                          f"{minutes:.1f} min on {os.cpu_count()} core(s)")
    assert ok, bad[:5]


def test_2_oracle_lower_bound_and_division_optimality(capsys):
    below, mismatched = [], []
    for seed in range(100):
        c, net = tiny_instance(seed)
        _, optimum = brute_force_optimal(c, net)
        for alg in ALL:
            if alg == "repeated-bisection" and not net.is_uniform:
                continue
            name, opts = variant_options(alg, SolveOptions(seed=seed))
            s = solve(name, c, net, opts)
            assert verify(s, c, net) == []
            if schedule_cost(s, net) < optimum:
                below.append((seed, alg))
        table = detect_zcsc(c, net)
        if simple_dp(table, "sc").cost != exhaustive_division(table, "sc"):
            mismatched.append(seed)
    ok = not below and not mismatched
    report(capsys, 2, ok, f"100 tiny instances, {len(below)} costs below optimum, "
                          f"{len(mismatched)} division mismatches")
    assert ok, (below[:5], mismatched[:5])


def _adjacent_pairs(count):
    """Adjacent feasible pieces ``(a, b), (b, e)`` on uniform-capacity networks."""
    seed = 0
    while count:
        rng = np.random.default_rng(seed)
        npc = int(rng.integers(2, 6))
        c, net = random_instance(12, 5, 0.6, npc, link=float(rng.choice([0.4, 0.7, 1.0])), seed=seed)
        seed += 1
        t = detect_zcsc(c, net)
        k = int(rng.integers(t.num_binary))
        l = int(t.ends[k])
        if l >= t.num_binary:
            continue
        a, b, e = t.boundary_instant(k), t.boundary_instant(l), t.boundary_instant(int(t.ends[l]))
        count -= 1
        yield t, (a, b), (b, e), seed


def test_3_relabelling_dominance(capsys):
    worse, worse_star, not_optimal = 0, 0, 0
    for t, pa, pb, seed in _adjacent_pairs(100):
        plain, relab = sc(t, pa, pb), scb(t, pa, pb)
        worse += relab.cost > plain.cost
        prev = t.lookup(*pa)
        worse_star += scb_star(prev, t, pb, seed=seed).cost > sc_star(prev, t, pb, seed=seed).cost
        not_optimal += relab.cost != relabel_oracle(prev, t.lookup(*pb), t.network.dist)
    ok = worse == worse_star == not_optimal == 0
    report(capsys, 3, ok, f"100 pairs: scb>sc {worse}, scb*>sc* {worse_star}, "
                          f"scb != permutation optimum {not_optimal}")
    assert ok


def _means(results, algorithms):
    return {a: float(np.mean([r[a][0] for r in results])) for a in algorithms}


def test_4_ratio_bands(capsys):
    means = _means(solve_cells([(_params(), seed, MAIN) for seed in range(20)]), MAIN)
    rb = means["repeated-bisection"]
    lb_ratio = means["local-best"] / rb
    zs_ratio = means["zs-scb-star"] / rb
    ok = lb_ratio <= 0.65 and zs_ratio <= 0.80
    report(capsys, 4, ok, f"LB/RB = {lb_ratio:.3f} (<= 0.65), ZS(SCB*)/RB = {zs_ratio:.3f} (<= 0.80); "
                          f"means {', '.join(f'{a} {m:.1f}' for a, m in means.items())}")
    assert ok


def _inversions(seq, increasing):
    return sum((b < a) if increasing else (b > a) for a, b in zip(seq, seq[1:]))


def test_5_trends(capsys):
    details, ok = [], True
    for sweep, increasing in [("qubits", True), ("binary_fraction", True), ("link_probability", False)]:
        values = SWEEPS[sweep]
        curves = {a: [] for a in MAIN}
        for v in values:
            m = _means(solve_cells([(_params(**{sweep: v}), seed, MAIN) for seed in range(20)]), MAIN)
            for a in MAIN:
                curves[a].append(m[a])
        inv = sum(_inversions(curves[a], increasing) for a in MAIN)
        ok &= inv <= 1
        details.append(f"{sweep} {inv} inversion(s)")
        with capsys.disabled():
            for a in MAIN:
                print(f"\n  {sweep:<16} {a:<18} " + " ".join(f"{x:8.1f}" for x in curves[a]), end="")
    report(capsys, 5, ok, "; ".join(details) + " (at most one per sweep)")
    assert ok


def test_6_tabu_sanity(capsys):
    worse = 0
    runs = 0
    for seed in range(20):
        for nq, npc in [(50, 8), (20, 4), (9, 3)]:
            c, net = random_instance(nq, 20, 0.5, npc, link=[1.0, 0.5][seed % 2], seed=seed)
            res = tabu_search(GroupedInstance.singletons(build_weights(c)), net, seed=seed)
            worse += res.cost > res.initial_cost
            runs += 1
    w = np.zeros((10, 10), dtype=np.int64)
    w[:5, :5] = 1
    w[5:, 5:] = 1
    np.fill_diagonal(w, 0)
    misses = sum(
        tabu_search(GroupedInstance.singletons(w), complete_network([5, 5]), seed=s).cost != 0
        for s in range(10)
    )
    ok = worse == 0 and misses == 0
    report(capsys, 6, ok, f"{runs} runs with best > initial: {worse}; two-clique misses on seeds 0-9: {misses}")
    assert ok


def test_7_zcsc_correctness(capsys):
    bad_homes, non_monotone, entries = 0, 0, 0
    for seed in range(60):
        rng = np.random.default_rng(seed)
        npc = int(rng.integers(2, 4))
        nq = int(rng.integers(3, 8))
        c, net = random_instance(nq, 2, 0.8, npc, link=0.6, seed=seed)
        c = Circuit.from_ops(nq, [g.qubits for g in c.gates][:8])
        packing = ("ffd", "ff")[seed % 2]
        t = detect_zcsc(c, net, packing)
        last = c.last_instant
        evens = range(0, last + 1, 2)
        feasible = {}
        for a in evens:
            for b in evens:
                if a < b:
                    h = t.lookup(a, b)
                    feasible[a, b] = h is not None
                    if h is not None:
                        entries += 1
                        bad_homes += not (piece_is_local(c, h, a, b) and capacity_ok(h, net.capacities))
        for (a, b), f in feasible.items():
            if f:
                non_monotone += not all(
                    feasible[x, y] for (x, y) in feasible if a <= x and y <= b
                )
    ok = bad_homes == 0 and non_monotone == 0
    report(capsys, 7, ok, f"{entries} feasible entries re-verified, {bad_homes} bad homes, "
                          f"{non_monotone} monotonicity violations")
    assert ok
