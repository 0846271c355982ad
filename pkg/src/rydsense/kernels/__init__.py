"""Kernel backend selection.

The compiled extension is preferred when present; the pure-numpy reference
backend is the fallback.  Set RYDSENSE_KERNEL=reference|native to force a
choice (forcing `native` raises if the extension is missing).
"""

import os

_requested = os.environ.get("RYDSENSE_KERNEL", "auto")

if _requested not in ("auto", "native", "reference"):
    raise ValueError(f"RYDSENSE_KERNEL must be auto|native|reference, got {_requested!r}")

if _requested in ("auto", "native"):
    try:
        from . import _native as _impl  # type: ignore[attr-defined]
    except ImportError:
        if _requested == "native":
            raise
        from . import reference as _impl
else:
    from . import reference as _impl

from . import reference  # noqa: F401  (always importable for benchmarks/tests)

rk4_steps = _impl.rk4_steps
apply_h = _impl.apply_h
BACKEND = _impl.BACKEND
