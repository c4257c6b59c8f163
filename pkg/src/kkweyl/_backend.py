"""Kernel backend selection.

The compiled extension is used when it imports; setting ``KKWEYL_PURE_PYTHON=1``
forces the numpy fallback.
"""

from __future__ import annotations

import os

from . import _pykernels

python_kernels = _pykernels
compiled_kernels = None

if os.environ.get("KKWEYL_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled_kernels  # type: ignore[no-redef]
    except ImportError:  # extension not built
        compiled_kernels = None

kernels = compiled_kernels if compiled_kernels is not None else python_kernels
BACKEND = "cython" if compiled_kernels is not None else "python"


def use(name: str) -> None:
    """Switch the active backend (``"cython"`` or ``"python"``) at runtime."""
    global kernels, BACKEND
    if name == "python":
        kernels, BACKEND = python_kernels, "python"
    elif name == "cython":
        if compiled_kernels is None:
            raise RuntimeError("compiled kernels are not available")
        kernels, BACKEND = compiled_kernels, "cython"
    else:
        raise ValueError(f"unknown backend {name!r}")
