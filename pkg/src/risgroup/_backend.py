"""Kernel selection: compiled extension if importable, numpy otherwise.

Set ``RISGROUP_BACKEND=python`` to force the fallback.
"""

import os

from . import _kernels_py

if os.environ.get("RISGROUP_BACKEND", "").lower() == "python":
    kernels = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        kernels = _kernels_py
        BACKEND = "python"


def get_kernels(name: str | None = None):
    """Return the kernel module for ``name`` ("cython", "python") or the default."""
    if name is None:
        return kernels
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown backend {name!r}")
