"""Hot-loop kernels: profile evaluation and exhaustive profile search.

Two interchangeable implementations exist: a compiled Cython extension
(`nmx._engine_c`) and a numpy-vectorized fallback (`nmx._engine_py`). The
compiled one walks primitive lanes scalar-wise with early aborts; the
fallback evaluates all lanes at once with fancy indexing. Selection happens
at import time; set NMX_ENGINE=py or NMX_ENGINE=c to force one.

Both must return bit-identical results; the parity test and the benchmark
in benchmarks/bench_engine.py exercise that.
"""

from __future__ import annotations

import os

from . import _engine_py

_impl = None
_name = None

_forced = os.environ.get("NMX_ENGINE", "").strip().lower()
if _forced in ("", "c"):
    try:
        from . import _engine_c as _impl_c

        _impl = _impl_c
        _name = "c"
    except ImportError:
        if _forced == "c":
            raise
if _impl is None:
    _impl = _engine_py
    _name = "py"


def backend_name() -> str:
    return _name


def evaluate_assignment(enc, assign) -> int:
    """Scaled worst-case cost of one profile assignment."""
    return _impl.evaluate_assignment(enc, assign)


def search_min_profile(enc, enum):
    """Exact min over profiles; returns (best scaled cost, assignment, count).

    Deterministic: profiles are enumerated as an odometer over the
    enumerator's canonical argument order, first optimum kept.
    """
    return _impl.search_min_profile(enc, enum)
