"""Name-based dispatch over the scheduling algorithms."""

from __future__ import annotations

from dataclasses import dataclass

from .baseline import repeated_bisection
from .circuit import Circuit
from .localbest import DEFAULT_LOOKAHEAD, local_best
from .network import Network
from .placement import Schedule
from .tabu import DEFAULT_ITERATIONS, DEFAULT_TABU_LENGTH
from .zerostitch import DEFAULT_STITCH_ITERATIONS, ZcscTable, zero_stitching

__all__ = ["ALGORITHMS", "VARIANTS", "SolveOptions", "solve", "variant_options"]

ALGORITHMS = ("local-best", "zero-stitch", "repeated-bisection")

# fixed (dp, stitch) pairs benchmarked as separate algorithms
VARIANTS = {
    "zs-sc": ("simple", "sc"),
    "zs-scb": ("simple", "scb"),
    "zs-sc-star": ("improved", "sc-star"),
    "zs-scb-star": ("improved", "scb-star"),
}


@dataclass(frozen=True)
class SolveOptions:
    lookahead: int = DEFAULT_LOOKAHEAD
    tabu_iterations: int = DEFAULT_ITERATIONS
    tabu_length: int = DEFAULT_TABU_LENGTH
    dp: str = "improved"
    stitch: str = "scb-star"
    packing: str = "ffd"
    stitch_iterations: int = DEFAULT_STITCH_ITERATIONS
    seed: int = 0


def variant_options(name: str, base: SolveOptions = SolveOptions()) -> tuple[str, SolveOptions]:
    """Resolve a benchmark label (an algorithm or a Zero-Stitching variant)."""
    if name in VARIANTS:
        dp, stitch = VARIANTS[name]
        return "zero-stitch", SolveOptions(**{**base.__dict__, "dp": dp, "stitch": stitch})
    if name in ALGORITHMS:
        return name, base
    raise ValueError(f"unknown algorithm {name!r}")


def solve(
    algorithm: str,
    c: Circuit,
    net: Network,
    opts: SolveOptions = SolveOptions(),
    table: ZcscTable | None = None,
) -> Schedule:
    if algorithm == "local-best":
        return local_best(c, net, opts.lookahead, opts.tabu_iterations, opts.tabu_length, opts.seed)
    if algorithm == "zero-stitch":
        return zero_stitching(
            c, net, opts.dp, opts.stitch, opts.packing, opts.stitch_iterations,
            opts.tabu_length, opts.seed, table,
        )
    if algorithm == "repeated-bisection":
        return repeated_bisection(c, net, opts.seed)
    raise ValueError(f"unknown algorithm {algorithm!r}")
