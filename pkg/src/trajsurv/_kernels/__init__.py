"""Kernel backend selection.

The compiled extension is preferred when present; a numpy implementation with
identical semantics is the fallback.  Set ``TRAJSURV_PURE=1`` in the
environment to force the fallback (used by the parity tests and benchmarks).
"""

import os

if os.environ.get("TRAJSURV_PURE"):
    from . import _pure as _impl
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        from . import _pure as _impl

BACKEND = _impl.BACKEND
km_counts = _impl.km_counts
logrank_counts = _impl.logrank_counts
piecewise_inverse = _impl.piecewise_inverse
piecewise_cumhaz = _impl.piecewise_cumhaz

__all__ = [
    "BACKEND",
    "km_counts",
    "logrank_counts",
    "piecewise_inverse",
    "piecewise_cumhaz",
]
