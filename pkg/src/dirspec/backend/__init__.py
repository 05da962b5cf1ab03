"""Kernel backend selection.

Two interchangeable implementations of the hot kernels exist: a compiled
Cython module and a NumPy one. The compiled module is preferred when it
imports cleanly; setting the environment variable ``DIRSPEC_PURE=1`` forces
the NumPy kernels (useful for benchmarking and debugging).
"""

import os

from . import _reference

_COMPILED = None
try:
    from . import _kernels as _COMPILED
except ImportError:
    _COMPILED = None

if _COMPILED is not None and os.environ.get("DIRSPEC_PURE", "") not in ("1", "true"):
    _active = _COMPILED
    ACTIVE_BACKEND = "compiled"
else:
    _active = _reference
    ACTIVE_BACKEND = "reference"

jacobi_sweeps = _active.jacobi_sweeps
csr_matmul = _active.csr_matmul


def available_backends():
    """Name -> module for every importable backend."""
    out = {"reference": _reference}
    if _COMPILED is not None:
        out["compiled"] = _COMPILED
    return out
