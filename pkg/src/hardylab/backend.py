"""Kernel backend selection.

The quadrature hot loop exists twice: a compiled Cython extension
(``hardylab._kernels``) and a numpy reference (``hardylab._kernels_py``).
At import time the compiled one is used when available; set the environment
variable ``HARDYLAB_BACKEND`` to ``cython``, ``python`` or ``auto`` to force
the choice.  ``cython`` raises if the extension did not build.
"""

from __future__ import annotations

import os

from . import _kernels_py

_CHOICE = os.environ.get("HARDYLAB_BACKEND", "auto").strip().lower()
if _CHOICE not in ("auto", "cython", "python"):
    raise ImportError(
        f"HARDYLAB_BACKEND must be one of auto/cython/python, got {_CHOICE!r}"
    )

if _CHOICE == "python":
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        if _CHOICE == "cython":
            raise ImportError(
                "HARDYLAB_BACKEND=cython but the compiled kernel is not "
                "available; rebuild the package or use HARDYLAB_BACKEND=python"
            ) from None
        _impl = _kernels_py

weighted_piece_sum = _impl.weighted_piece_sum


def active_backend() -> str:
    """Name of the kernel implementation in use ('cython' or 'python')."""
    return _impl.BACKEND_NAME
