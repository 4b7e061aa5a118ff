"""Rasterization kernels with import-time backend selection.

The compiled Cython core is preferred when built; otherwise the
pure-NumPy fallback is used.  Set ROCOTEX_KERNELS=numpy or =compiled to
force a backend (``compiled`` raises if the extension is missing).
"""

from __future__ import annotations

import os

from rocotex.kernels import numpy_backend

_requested = os.environ.get("ROCOTEX_KERNELS", "auto").lower()

compiled_backend = None
if _requested in ("auto", "compiled"):
    try:
        from rocotex.kernels import _core as compiled_backend
    except ImportError:
        if _requested == "compiled":
            raise ImportError(
                "ROCOTEX_KERNELS=compiled but the extension is not built; "
                "run `python setup.py build_ext --inplace` or reinstall."
            )
        compiled_backend = None

active_backend = compiled_backend if compiled_backend is not None else numpy_backend
BACKEND_NAME = active_backend.NAME

rasterize_triangles = active_backend.rasterize_triangles

__all__ = [
    "BACKEND_NAME",
    "active_backend",
    "compiled_backend",
    "numpy_backend",
    "rasterize_triangles",
]
