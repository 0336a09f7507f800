"""Parameter sweeps over random instances with verified results.

Each sweep varies one parameter and keeps the others at their defaults.
Every schedule is re-verified before its row is emitted; a failure aborts
the run and writes the offending instance to disk for reproduction.
"""

from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .algorithms import ALGORITHMS, VARIANTS, SolveOptions, solve, variant_options
from .circuit import Circuit, generate_random_circuit, serialize_circuit
from .network import Network, default_capacities, generate_random_network, serialize_network
from .placement import Schedule, schedule_cost, serialize_schedule, verify
from .zerostitch import detect_zcsc

__all__ = [
    "DEFAULTS",
    "SWEEPS",
    "DEFAULT_ALGORITHMS",
    "CSV_FIELDS",
    "ExperimentSpec",
    "ResultRow",
    "VerificationFailure",
    "capacity_imbalance_networks",
    "make_instance",
    "effective_algorithms",
    "run_experiment",
    "aggregate",
    "write_rows",
    "write_summary",
]

DEFAULTS: Mapping[str, float] = {
    "qubits": 50,
    "gates_per_qubit": 50,
    "binary_fraction": 0.5,
    "computers": 8,
    "link_probability": 1.0,
    "capacity_imbalance": 0,
}

SWEEPS: Mapping[str, tuple] = {
    "qubits": (10, 20, 30, 40, 50),
    "computers": (2, 4, 6, 8, 10, 12),
    "binary_fraction": (0.1, 0.3, 0.5, 0.7, 0.9),
    "link_probability": (0.3, 0.5, 0.7, 0.9, 1.0),
    "capacity_imbalance": (0, 2, 4, 6, 8),
}

DEFAULT_ALGORITHMS = ("local-best", "zero-stitch", "repeated-bisection")

CSV_FIELDS = ("param", "value", "algorithm", "seed", "cost", "teleports", "runtime_ms")

_INT_PARAMS = {"qubits", "gates_per_qubit", "computers", "capacity_imbalance"}


@dataclass(frozen=True)
class ResultRow:
    param: str
    value: float
    algorithm: str
    seed: int
    cost: int
    teleports: int
    runtime_ms: float

    def as_csv(self) -> list:
        return [self.param, self.value, self.algorithm, self.seed, self.cost,
                self.teleports, f"{self.runtime_ms:.3f}"]


@dataclass(frozen=True)
class ExperimentSpec:
    """One sweep: ``param`` takes each of ``values`` while the rest stay at ``defaults``."""

    param: str
    values: tuple
    defaults: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULTS))
    algorithms: tuple[str, ...] = DEFAULT_ALGORITHMS
    seeds: tuple[int, ...] = tuple(range(20))
    out: Path | None = None
    options: SolveOptions = SolveOptions()
    workers: int = 1

    def __post_init__(self):
        if self.param not in DEFAULTS:
            raise ValueError(f"unknown parameter {self.param!r}; choose from {sorted(DEFAULTS)}")
        unknown = set(self.defaults) - set(DEFAULTS)
        if unknown:
            raise ValueError(f"unknown default(s): {sorted(unknown)}")
        for a in self.algorithms:
            if a not in ALGORITHMS and a not in VARIANTS:
                raise ValueError(f"unknown algorithm {a!r}")
        if not self.values:
            raise ValueError("at least one value is required")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        object.__setattr__(self, "defaults", {**DEFAULTS, **self.defaults})

    @classmethod
    def sweep(cls, name: str, seeds: int = 20, **kwargs) -> ExperimentSpec:
        """A predefined sweep over ``seeds`` seeds (0..seeds-1)."""
        if name not in SWEEPS:
            raise ValueError(f"unknown sweep {name!r}; choose from {sorted(SWEEPS)}")
        return cls(name, SWEEPS[name], seeds=tuple(range(seeds)), **kwargs)

    def params(self, value) -> dict:
        p = {**self.defaults, self.param: value}
        return {k: (int(v) if k in _INT_PARAMS else float(v)) for k, v in p.items()}


class VerificationFailure(RuntimeError):
    """A produced schedule failed verification."""

    def __init__(self, message: str, circuit: Circuit, network: Network, schedule: Schedule):
        super().__init__(message)
        self.circuit = circuit
        self.network = network
        self.schedule = schedule
        self.repro_dir: Path | None = None

    def dump(self, directory: Path) -> Path:
        directory.mkdir(parents=True, exist_ok=True)
        (directory / "circuit.txt").write_text(serialize_circuit(self.circuit))
        (directory / "network.txt").write_text(serialize_network(self.network))
        (directory / "schedule.txt").write_text(serialize_schedule(self.schedule))
        (directory / "error.txt").write_text(str(self) + "\n")
        self.repro_dir = directory
        return directory


def capacity_imbalance_networks(n_qubits: int, n_computers: int, delta: int) -> list[int]:
    """Capacities with ``max - min == delta`` and the uniform default's total.

    An even ``delta`` moves ``delta/2`` slots from the second computer to the
    first.  An odd one adds ``ceil(delta/2)`` to the first computer and takes
    ``floor(delta/2)`` from the second and one from the third, so it needs
    three computers and ``delta >= 3``.
    """
    caps = default_capacities(n_qubits, n_computers)
    if delta < 0:
        raise ValueError("delta must be non-negative")
    if delta == 0:
        return caps
    u = caps[0]
    hi, lo = math.ceil(delta / 2), delta // 2
    if n_computers < 2 or (delta % 2 and (n_computers < 3 or delta < 3)):
        raise ValueError(f"delta {delta} cannot be realised on {n_computers} computers")
    if u - lo < 1:
        raise ValueError(f"delta {delta} would leave a computer without capacity")
    caps[0] += hi
    caps[1] -= lo
    if delta % 2:
        caps[2] -= 1
    return caps


def make_instance(params: Mapping[str, float], seed: int) -> tuple[Circuit, Network]:
    """Random circuit and network for one parameter setting and seed."""
    cseed, nseed = np.random.SeedSequence(seed).generate_state(2)
    nq, npc = int(params["qubits"]), int(params["computers"])
    c = generate_random_circuit(nq, int(params["gates_per_qubit"]), float(params["binary_fraction"]), int(cseed))
    caps = capacity_imbalance_networks(nq, npc, int(params["capacity_imbalance"]))
    net = generate_random_network(npc, float(params["link_probability"]), caps, int(nseed))
    return c, net


def effective_algorithms(spec: ExperimentSpec) -> tuple[str, ...]:
    """Algorithms actually run: relabelling methods and the baseline need uniform capacities.

    In a sweep with non-uniform capacities the baseline and the relabelling
    variants are dropped, and ``zero-stitch`` uses the improved DP with SC*.
    """
    nonuniform = any(spec.params(v)["capacity_imbalance"] for v in spec.values)
    if not nonuniform:
        return spec.algorithms
    keep = []
    for a in spec.algorithms:
        if a == "repeated-bisection" or a in ("zs-scb", "zs-scb-star"):
            continue
        keep.append(a)
    return tuple(keep)


def _options_for(alg: str, spec: ExperimentSpec, seed: int) -> tuple[str, SolveOptions]:
    base = replace(spec.options, seed=seed)
    name, opts = variant_options(alg, base)
    if alg == "zero-stitch" and any(spec.params(v)["capacity_imbalance"] for v in spec.values):
        opts = replace(opts, dp="improved", stitch="sc-star")
    return name, opts


def _run_instance(spec: ExperimentSpec, vi: int, seed: int) -> list[ResultRow]:
    value = spec.values[vi]
    c, net = make_instance(spec.params(value), seed)
    rows = []
    table, table_ms = None, 0.0
    for alg in effective_algorithms(spec):
        name, opts = _options_for(alg, spec, seed)
        t0 = time.perf_counter()
        if name == "zero-stitch" and table is None:
            table = detect_zcsc(c, net, opts.packing)
            table_ms = (time.perf_counter() - t0) * 1000
            t0 = time.perf_counter()
        sched = solve(name, c, net, opts, table if name == "zero-stitch" else None)
        ms = (time.perf_counter() - t0) * 1000 + (table_ms if name == "zero-stitch" else 0.0)
        problems = verify(sched, c, net)
        if problems:
            raise VerificationFailure(
                f"{alg} on {spec.param}={value} seed={seed}: {problems[0]} "
                f"({len(problems)} violation(s))", c, net, sched,
            )
        rows.append(ResultRow(spec.param, value, alg, seed, schedule_cost(sched, net),
                              sched.num_teleports, ms))
    return rows


def _task(args):
    return _run_instance(*args)


def run_experiment(
    spec: ExperimentSpec, progress: Callable[[int, int], None] | None = None
) -> list[ResultRow]:
    """Run every (value, seed) instance; rows come back in canonical order.

    Instances run in ``spec.workers`` processes.  Rows are sorted by value,
    algorithm and seed whatever the completion order, and written to
    ``<out>/<param>.csv`` plus ``<out>/<param>_summary.csv`` when ``out`` is set.
    """
    tasks = [(spec, vi, s) for vi in range(len(spec.values)) for s in spec.seeds]
    rows: list[ResultRow] = []
    try:
        if spec.workers > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=spec.workers) as pool:
                for i, chunk in enumerate(pool.map(_task, tasks)):
                    rows += chunk
                    if progress:
                        progress(i + 1, len(tasks))
        else:
            for i, t in enumerate(tasks):
                rows += _task(t)
                if progress:
                    progress(i + 1, len(tasks))
    except VerificationFailure as exc:
        where = Path(spec.out) if spec.out else Path.cwd()
        exc.dump(where / "repro")
        raise
    order = {a: i for i, a in enumerate(spec.algorithms)}
    vidx = {v: i for i, v in enumerate(spec.values)}
    rows.sort(key=lambda r: (vidx[r.value], order[r.algorithm], r.seed))
    if spec.out:
        out = Path(spec.out)
        out.mkdir(parents=True, exist_ok=True)
        write_rows(rows, out / f"{spec.param}.csv")
        write_summary(aggregate(rows), out / f"{spec.param}_summary.csv")
    return rows


def write_rows(rows: Iterable[ResultRow], path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_FIELDS)
        for r in rows:
            w.writerow(r.as_csv())


def aggregate(rows: Sequence[ResultRow]) -> list[dict]:
    """Mean and sample standard deviation of cost per (value, algorithm)."""
    groups: dict[tuple, list[ResultRow]] = {}
    for r in rows:
        groups.setdefault((r.param, r.value, r.algorithm), []).append(r)
    out = []
    for (param, value, alg), rs in groups.items():
        cost = np.array([r.cost for r in rs], dtype=float)
        out.append({
            "param": param,
            "value": value,
            "algorithm": alg,
            "n": len(rs),
            "mean_cost": float(cost.mean()),
            "std_cost": float(cost.std(ddof=1)) if len(rs) > 1 else 0.0,
            "mean_teleports": float(np.mean([r.teleports for r in rs])),
            "mean_runtime_ms": float(np.mean([r.runtime_ms for r in rs])),
        })
    return out


def write_summary(summary: Sequence[dict], path: Path) -> None:
    fields = ("param", "value", "algorithm", "n", "mean_cost", "std_cost",
              "mean_teleports", "mean_runtime_ms")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        for row in summary:
            w.writerow({k: (f"{v:.3f}" if isinstance(v, float) else v) for k, v in row.items()})


def default_workers() -> int:
    return max(1, os.cpu_count() or 1)
