"""Kernel backend selection: compiled extension if available, else pure Python.

Set ``OFCLIMB_PURE=1`` to force the pure backend (used by the equivalence
tests and the benchmark).
"""

import os

if os.environ.get("OFCLIMB_PURE") == "1":
    from . import _kernels_py as kernels
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as kernels

BACKEND = kernels.BACKEND

__all__ = ["kernels", "BACKEND"]
