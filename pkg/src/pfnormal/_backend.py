"""Select the compiled kernels when available, else the pure-Python ones.

Set ``PFNORMAL_BACKEND=python`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("PFNORMAL_BACKEND", "").lower() == "python":
    kernels = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        kernels = _kernels_py
        BACKEND = "python"

KernelError = _kernels_py.KernelError

__all__ = ["BACKEND", "KernelError", "kernels"]
