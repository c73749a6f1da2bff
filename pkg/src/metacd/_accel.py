"""Numba switch for the hot kernels.

Kernels are written once as plain Python over numpy arrays and wrapped with
:func:`jit`.  Setting ``METACD_NUMBA=0`` in the environment (before import)
leaves them as interpreted Python, which is slow but has no compiler
dependency.  The interpreted body of a compiled kernel stays reachable through
``kernel.py_func`` so both paths can be compared in one process.
"""
from __future__ import annotations

import os

_FLAG = os.environ.get("METACD_NUMBA", "1").strip().lower()

try:  # pragma: no cover - import guard
    import numba as _numba
except ImportError:  # pragma: no cover
    _numba = None

NUMBA_ENABLED = _numba is not None and _FLAG not in {"0", "false", "no", "off"}


def jit(fn):
    if NUMBA_ENABLED:
        return _numba.njit(cache=True, nogil=True)(fn)
    fn.py_func = fn
    return fn


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "python"
