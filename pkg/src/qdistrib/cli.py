"""Command-line interface.

Exit codes: 0 on success, 2 when a schedule fails verification, 1 for any
usage error (bad arguments, unreadable or malformed input, infeasible
instance).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .algorithms import ALGORITHMS, VARIANTS, SolveOptions, solve
from .bench import DEFAULT_ALGORITHMS, DEFAULTS, SWEEPS, ExperimentSpec, VerificationFailure, default_workers, run_experiment
from .circuit import CircuitFormatError, generate_random_circuit, load_circuit, serialize_circuit
from .localbest import DEFAULT_LOOKAHEAD
from .network import NetworkFormatError, default_capacities, generate_random_network, load_network, serialize_network
from .placement import InfeasibleInstanceError, load_schedule, schedule_cost, serialize_schedule, verify
from .tabu import DEFAULT_ITERATIONS, DEFAULT_TABU_LENGTH
from .zerostitch import DEFAULT_STITCH_ITERATIONS, DPS, PACKINGS, STITCHES

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _cmd_generate_circuit(args) -> int:
    c = generate_random_circuit(args.qubits, args.gates_per_qubit, args.binary_fraction, args.seed)
    _write(serialize_circuit(c), args.out)
    return EXIT_OK


def _cmd_generate_network(args) -> int:
    if args.capacities:
        caps = [int(x) for x in args.capacities.split(",")]
        if len(caps) != args.computers:
            raise UsageError("--capacities needs one value per computer")
    elif args.qubits:
        caps = default_capacities(args.qubits, args.computers)
    else:
        raise UsageError("give --qubits (for default capacities) or --capacities")
    net = generate_random_network(args.computers, args.link_probability, caps, args.seed)
    _write(serialize_network(net), args.out)
    return EXIT_OK


def _load_instance(args):
    return load_circuit(args.circuit), load_network(args.network)


def _cmd_solve(args) -> int:
    c, net = _load_instance(args)
    opts = SolveOptions(
        lookahead=args.lookahead,
        tabu_iterations=args.tabu_iters,
        tabu_length=args.tabu_length,
        dp=args.dp,
        stitch=args.stitch,
        packing=args.packing,
        stitch_iterations=args.stitch_iters,
        seed=args.seed,
    )
    sched = solve(args.algorithm, c, net, opts)
    _write(serialize_schedule(sched), args.out)
    problems = verify(sched, c, net)
    for v in problems:
        print(f"violation: {v}", file=sys.stderr)
    print(f"cost {schedule_cost(sched, net)} teleports {sched.num_teleports}", file=sys.stderr)
    return EXIT_INVALID if problems else EXIT_OK


def _cmd_verify(args) -> int:
    c, net = _load_instance(args)
    sched = load_schedule(args.schedule)
    problems = verify(sched, c, net)
    for v in problems:
        print(f"violation: {v}")
    if problems:
        print(f"INVALID: {len(problems)} violation(s)")
        return EXIT_INVALID
    print(f"valid; cost {schedule_cost(sched, net)} teleports {sched.num_teleports}")
    return EXIT_OK


def _cmd_bench(args) -> int:
    values = SWEEPS[args.sweep] if args.values is None else tuple(
        float(v) if args.sweep in ("binary_fraction", "link_probability") else int(v)
        for v in args.values.split(",")
    )
    defaults = dict(DEFAULTS)
    for key in ("qubits", "gates_per_qubit", "binary_fraction", "computers", "link_probability"):
        val = getattr(args, key)
        if val is not None:
            defaults[key] = val
    algorithms = tuple(args.algorithms.split(",")) if args.algorithms else DEFAULT_ALGORITHMS
    opts = SolveOptions(
        lookahead=args.lookahead,
        tabu_iterations=args.tabu_iters,
        tabu_length=args.tabu_length,
        packing=args.packing,
        stitch_iterations=args.stitch_iters,
    )
    spec = ExperimentSpec(
        args.sweep, values, defaults, algorithms, tuple(range(args.seeds)), Path(args.out), opts,
        args.workers or default_workers(),
    )

    def progress(done, total):
        if not args.quiet:
            print(f"\r{done}/{total} instances", end="", file=sys.stderr, flush=True)

    try:
        rows = run_experiment(spec, progress)
    except VerificationFailure as exc:
        print(f"\nverification failed: {exc}; instance written to {exc.repro_dir}", file=sys.stderr)
        return EXIT_INVALID
    if not args.quiet:
        print(file=sys.stderr)
    print(f"{len(rows)} rows written to {Path(args.out) / (args.sweep + '.csv')}")
    return EXIT_OK


def _add_solver_flags(p, with_dp: bool = True):
    p.add_argument("--lookahead", type=int, default=DEFAULT_LOOKAHEAD, help="Local-Best look-ahead r")
    p.add_argument("--tabu-iters", type=int, default=DEFAULT_ITERATIONS, help="tabu iterations for the initial assignment")
    p.add_argument("--tabu-length", type=int, default=DEFAULT_TABU_LENGTH, help="tabu list length")
    p.add_argument("--stitch-iters", type=int, default=DEFAULT_STITCH_ITERATIONS,
                   help="tabu iterations per recomputed piece (SC*/SCB*)")
    p.add_argument("--packing", choices=PACKINGS, default="ffd")
    if with_dp:
        p.add_argument("--dp", choices=DPS, default="improved")
        p.add_argument("--stitch", choices=STITCHES, default="scb-star")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qdistrib", description="Teleportation scheduling for distributed quantum circuits.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate-circuit", help="write a random circuit")
    p.add_argument("--qubits", type=int, default=int(DEFAULTS["qubits"]))
    p.add_argument("--gates-per-qubit", type=int, default=int(DEFAULTS["gates_per_qubit"]))
    p.add_argument("--binary-fraction", type=float, default=DEFAULTS["binary_fraction"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output file (stdout if omitted)")
    p.set_defaults(func=_cmd_generate_circuit)

    p = sub.add_parser("generate-network", help="write a random connected network")
    p.add_argument("--computers", type=int, default=int(DEFAULTS["computers"]))
    p.add_argument("--link-probability", type=float, default=DEFAULTS["link_probability"])
    p.add_argument("--qubits", type=int, default=None, help="size capacities as ceil(qubits/computers)+1")
    p.add_argument("--capacities", default=None, help="comma-separated capacities")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_generate_network)

    p = sub.add_parser("solve", help="compute a teleportation schedule")
    p.add_argument("--algorithm", choices=ALGORITHMS, default="local-best")
    p.add_argument("--circuit", required=True)
    p.add_argument("--network", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    _add_solver_flags(p)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("verify", help="check a schedule against a circuit and network")
    p.add_argument("--circuit", required=True)
    p.add_argument("--network", required=True)
    p.add_argument("--schedule", required=True)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("bench", help="run a parameter sweep and write CSV results")
    p.add_argument("--sweep", choices=sorted(SWEEPS), required=True)
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--values", default=None, help="comma-separated values (default: the sweep's grid)")
    p.add_argument("--algorithms", default=None,
                   help="comma-separated, from " + ", ".join(ALGORITHMS + tuple(VARIANTS)))
    p.add_argument("--workers", type=int, default=None, help="parallel processes (default: CPU count)")
    p.add_argument("--quiet", action="store_true")
    for key in ("qubits", "gates_per_qubit", "computers"):
        p.add_argument("--" + key.replace("_", "-"), dest=key, type=int, default=None)
    for key in ("binary_fraction", "link_probability"):
        p.add_argument("--" + key.replace("_", "-"), dest=key, type=float, default=None)
    _add_solver_flags(p, with_dp=False)
    p.set_defaults(func=_cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, CircuitFormatError, NetworkFormatError, InfeasibleInstanceError, ValueError, OSError) as exc:
        print(f"qdistrib {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
