"""Kernel backend selection.

The hot numeric kernels (batched Walsh-Hadamard transforms, check/symbol
message passing, prior aggregation, graph construction) exist twice: a
numba-jitted implementation and a pure-numpy fallback with identical
semantics.  The active backend is chosen once at import time from the
environment variable ``NBLDPC_BACKEND``:

    auto  (default) numba if importable, else numpy
    numba           require numba, fail otherwise
    numpy           force the pure-numpy path

Both modules export the same function set; ``get_backend`` gives explicit
access to either one (used by the benchmark and the cross-check tests).
"""

from __future__ import annotations

import os


def _load(name: str):
    if name == "numba":
        from . import nb_kernels

        return nb_kernels
    if name == "numpy":
        from . import np_kernels

        return np_kernels
    raise ValueError(f"unknown backend {name!r} (expected 'numba' or 'numpy')")


def get_backend(name: str):
    """Return the kernel module for an explicit backend name."""
    return _load(name)


_requested = os.environ.get("NBLDPC_BACKEND", "auto").strip().lower()

if _requested in ("", "auto"):
    try:
        kernels = _load("numba")
        ACTIVE = "numba"
    except ImportError:
        kernels = _load("numpy")
        ACTIVE = "numpy"
elif _requested in ("numba", "numpy"):
    kernels = _load(_requested)
    ACTIVE = _requested
else:
    raise RuntimeError(
        f"NBLDPC_BACKEND={_requested!r} not understood; use 'auto', 'numba' or 'numpy'"
    )


def active_backend() -> str:
    """Name of the backend selected at import time."""
    return ACTIVE
