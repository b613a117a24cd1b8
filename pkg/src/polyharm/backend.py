"""Selects the evaluation backend for the hot numeric kernels.

The batch term-table evaluators in ``polyharm._kernels`` exist in two
variants: a numba ``@njit``-compiled one and a pure-numpy one.  The active
variant is chosen once at import time from the ``POLYHARM_BACKEND``
environment variable:

* ``auto`` (default, also "") -- use numba when importable, else numpy;
* ``numba`` -- require numba, fail loudly if it is missing;
* ``numpy`` -- force the pure-numpy path (useful for debugging and for the
  backend benchmark in ``benchmarks/``).

Both variants compute the same sums in the same order, so per-backend
results are deterministic run to run.
"""

from __future__ import annotations

import os

_VALID = ("auto", "numba", "numpy")

_requested = os.environ.get("POLYHARM_BACKEND", "auto").strip().lower() or "auto"
if _requested not in _VALID:
    raise RuntimeError(
        f"POLYHARM_BACKEND={_requested!r} is not one of {_VALID}"
    )

if _requested == "numpy":
    BACKEND = "numpy"
elif _requested == "numba":
    import numba  # noqa: F401  (fail loudly if unavailable)

    BACKEND = "numba"
else:
    try:
        import numba  # noqa: F401

        BACKEND = "numba"
    except ImportError:  # pragma: no cover - depends on environment
        BACKEND = "numpy"

USING_NUMBA = BACKEND == "numba"


def worker_count() -> int:
    """Worker count for fan-out of independent verification jobs.

    Controlled by the ``POLYHARM_WORKERS`` environment variable (the only
    environment knob besides the backend switch).  Defaults to 1, i.e.
    sequential execution.
    """
    raw = os.environ.get("POLYHARM_WORKERS", "1")
    try:
        count = int(raw)
    except ValueError:
        raise RuntimeError(f"POLYHARM_WORKERS={raw!r} is not an integer") from None
    return max(1, count)
