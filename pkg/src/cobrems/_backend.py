"""Kernel backend selection.

``COBREMS_BACKEND=numpy`` forces the pure-numpy kernels; the default is numba
when it imports. ``COBREMS_NUM_THREADS`` caps the numba worker pool. Results do
not depend on the worker count: kernels write per-node values and all
reductions happen afterwards in a fixed order.
"""

from __future__ import annotations

import os

BACKEND_ENV = "COBREMS_BACKEND"
THREADS_ENV = "COBREMS_NUM_THREADS"


def _detect() -> str:
    requested = os.environ.get(BACKEND_ENV, "").strip().lower()
    if requested not in ("", "numba", "numpy"):
        raise RuntimeError(f"{BACKEND_ENV} must be 'numba' or 'numpy', got {requested!r}")
    if requested == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if requested == "numba":
            raise
        return "numpy"
    return "numba"


BACKEND = _detect()
HAVE_NUMBA = BACKEND == "numba"

if HAVE_NUMBA:
    import numba

    if "NUMBA_THREADING_LAYER" not in os.environ:
        numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
    _threads = os.environ.get(THREADS_ENV)
    if _threads:
        numba.set_num_threads(max(1, min(int(_threads), numba.config.NUMBA_NUM_THREADS)))
