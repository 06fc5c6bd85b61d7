"""Kernel backend selection.

The compiled extension is optional: builds without a C compiler, or
installs from a source checkout without running setup.py, fall back to
the numpy/scipy implementations transparently.  Set
COVERPLAN_FORCE_FALLBACK=1 to ignore the extension (used by the parity
tests and the benchmark).
"""

from __future__ import annotations

import os

from . import _fallback

if os.environ.get("COVERPLAN_FORCE_FALLBACK"):
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
        BACKEND = "compiled"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

covered_sets = _impl.covered_sets
coverage_gain = _impl.coverage_gain
coverage_commit = _impl.coverage_commit


def backend() -> str:
    """Name of the active backend: 'compiled' or 'python'."""
    return BACKEND


def get_impl(name: str | None = None):
    """Fetch a backend module by name; None returns the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _fallback
    if name == "compiled":
        from . import _kernels  # raises ImportError when not built
        return _kernels
    raise ValueError(f"unknown backend {name!r}")
