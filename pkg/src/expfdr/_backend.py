"""Kernel backend selection.

Prefers the compiled Cython extension; falls back to the pure-Python
implementation when the extension is unavailable. Set ``EXPFDR_BACKEND``
to ``compiled`` or ``python`` to force a choice (``compiled`` raises if
the extension cannot be imported).
"""

import os

_requested = os.environ.get("EXPFDR_BACKEND", "").strip().lower()

if _requested == "python":
    from . import _kernels_py as kernels
elif _requested == "compiled":
    from . import _kernels as kernels  # type: ignore[no-redef]
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        from . import _kernels_py as kernels  # type: ignore[no-redef]


def backend_name() -> str:
    """Name of the active kernel backend: ``compiled`` or ``python``."""
    return kernels.BACKEND
