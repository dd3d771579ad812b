"""Kernel selection: the compiled extension when available, else pure Python.

Set ``HOPCOLOR_BACKEND=python`` to force the fallback.
"""

import os

from . import _pykernels

compiled = None
if os.environ.get("HOPCOLOR_BACKEND", "").lower() != "python":
    try:
        from . import _kernels as compiled  # type: ignore[no-redef]
    except ImportError:
        compiled = None

kernels = compiled if compiled is not None else _pykernels
name = "cython" if compiled is not None else "python"

__all__ = ["kernels", "compiled", "name"]
