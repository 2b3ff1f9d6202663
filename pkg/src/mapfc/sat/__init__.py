"""Propositional decision procedure.

The compiled CDCL kernel is used when it was built; otherwise the pure-Python
solver with the same interface is selected. ``MAPFC_PURE=1`` forces the
fallback.
"""
from __future__ import annotations

import os

from . import _pysolver

try:
    if os.environ.get("MAPFC_PURE"):
        raise ImportError("pure mode requested")
    from . import _cdcl as _native
except ImportError:  # pragma: no cover - depends on the build
    _native = None

KERNEL = "cython" if _native is not None else "python"


def kernel(name: str | None = None):
    """Return the solver module for ``name`` ("cython", "python" or None for best)."""
    if name is None:
        name = KERNEL
    if name == "python":
        return _pysolver
    if name == "cython":
        if _native is None:
            raise ImportError("compiled CDCL kernel is not available")
        return _native
    raise ValueError(f"unknown kernel {name!r}")


def solve_clauses(num_vars: int, clauses, *, impl: str | None = None, conflict_limit: int = -1):
    """Returns ``(status, model, stats)``; see :func:`_pysolver.solve`."""
    return kernel(impl).solve(num_vars, [list(c) for c in clauses], conflict_limit)
