"""Hot kernels with a compiled core and a pure-Python fallback.

The Cython extension ``_core`` is used when it was built; otherwise, or when
the environment variable ``QDISTRIB_PURE_PYTHON`` is set to a non-empty
value other than ``0``, the numpy implementation in ``_fallback`` is used.
Both produce identical results.
"""

import importlib
import os

from . import _fallback

_force_pure = os.environ.get("QDISTRIB_PURE_PYTHON", "") not in ("", "0")

_core = None
if not _force_pure:
    try:
        _core = importlib.import_module(f"{__name__}._core")
    except ImportError:  # extension not built
        _core = None

_impl = _core if _core is not None else _fallback

BACKEND = "cython" if _core is not None else "python"
INF = _fallback.INF

assignment_cost = _impl.assignment_cost
tabu_kernel = _impl.tabu_kernel
hungarian = _impl.hungarian
relabel_home = _impl.relabel_home
zcsc_scan = _impl.zcsc_scan
simple_dp = _impl.simple_dp
sc_star_kernel = _impl.sc_star_kernel
improved_dp = _impl.improved_dp


def backends():
    """Available implementations keyed by name (for tests and benchmarks)."""
    out = {"python": _fallback}
    if _core is not None:
        out["cython"] = _core
    return out


__all__ = [
    "BACKEND",
    "INF",
    "backends",
    "assignment_cost",
    "tabu_kernel",
    "hungarian",
    "relabel_home",
    "zcsc_scan",
    "simple_dp",
    "sc_star_kernel",
    "improved_dp",
]
