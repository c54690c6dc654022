"""Backend selection for the batch kernels.

The compiled extension is preferred. Setting ``KPRSIM_PURE_PYTHON=1`` in the
environment, or a missing build, selects the numpy fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("KPRSIM_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py

sample_rows = _impl.sample_rows
zero_known_rows = _impl.zero_known_rows
group_rows = _impl.group_rows
info_rows = _impl.info_rows


def backend_module(name: str):
    """Return the kernel module for ``name`` ("cython" or "python")."""
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown kernel backend {name!r}")
