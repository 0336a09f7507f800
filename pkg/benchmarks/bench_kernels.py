"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--qubits 30] [--computers 6] [--repeat 3]

Each kernel runs on the same inputs under both backends; the results are
checked for equality before the timings are reported.
"""

import argparse
import time

import numpy as np

from qdistrib._kernels import backends
from qdistrib.bench import DEFAULTS, make_instance
from qdistrib.tabu import build_weights, zobrist_keys


def _best_of(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _same(a, b):
    if isinstance(a, (tuple, list)):
        return len(a) == len(b) and all(_same(x, y) for x, y in zip(a, b))
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        return np.array_equal(np.asarray(a), np.asarray(b))
    return a == b


def cases(nq, npc, gpq, seed):
    params = {**DEFAULTS, "qubits": nq, "computers": npc, "gates_per_qubit": gpq}
    c, net = make_instance(params, seed)
    D = np.ascontiguousarray(net.dist, dtype=np.int64)
    caps = net.capacity_array
    pairs = np.ascontiguousarray(c.binary_pairs, dtype=np.int64)
    w = build_weights(c)
    sizes = np.ones(nq, dtype=np.int64)
    A = np.zeros((nq, npc), dtype=np.int64)
    start = np.arange(nq, dtype=np.int64) % npc
    zob = zobrist_keys(nq, npc, seed)
    ref = backends()["python"]
    ends, base, homes, labels = ref.zcsc_scan(pairs, nq, caps, True)
    prev = np.ascontiguousarray(homes[0])
    pid = int(base[int(ends[0])]) if int(ends[0]) < len(ends) else 0
    return {
        "tabu (500 iters)": lambda k: k.tabu_kernel(sizes, w, A, D, caps, start, 500, 10, zob),
        "zcsc scan": lambda k: k.zcsc_scan(pairs, nq, caps, True),
        "simple DP (SC)": lambda k: k.simple_dp(ends, base, homes, D, False),
        "simple DP (SCB)": lambda k: k.simple_dp(ends, base, homes, D, True),
        "SC* stitch": lambda k: k.sc_star_kernel(prev, labels[pid], homes[pid], D, caps, False, 10, 10, zob),
        "improved DP (SCB*)": lambda k: k.improved_dp(ends, base, homes, labels, D, caps, True, 10, 10, zob),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--qubits", type=int, default=30)
    ap.add_argument("--computers", type=int, default=6)
    ap.add_argument("--gates-per-qubit", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    impls = backends()
    if "cython" not in impls:
        print("compiled extension not built; only the Python backend is available")
    print(f"{args.qubits} qubits, {args.computers} computers, {args.gates_per_qubit} gates/qubit, "
          f"best of {args.repeat}")
    print(f"{'kernel':<20} {'python ms':>11} {'cython ms':>11} {'speedup':>8}")
    for name, run in cases(args.qubits, args.computers, args.gates_per_qubit, args.seed).items():
        t_py, out_py = _best_of(lambda: run(impls["python"]), args.repeat)
        row = f"{name:<20} {t_py * 1e3:11.2f}"
        if "cython" in impls:
            t_cy, out_cy = _best_of(lambda: run(impls["cython"]), args.repeat)
            if not _same(out_py, out_cy):
                raise SystemExit(f"{name}: backends disagree")
            row += f" {t_cy * 1e3:11.2f} {t_py / t_cy:7.1f}x"
        print(row)


if __name__ == "__main__":
    main()
