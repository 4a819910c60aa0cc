"""Kernel backend selection.

The compiled extension is used when it was built; ``LSFM_PURE_PYTHON=1``
forces the numpy fallback.
"""
import os

from . import _kernels_py

try:
    if os.environ.get("LSFM_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-python backend requested")
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

BACKEND = "cython" if _compiled is not None else "python"


def backend_module(name=None):
    """Return the kernel module for ``name`` (``'cython'``, ``'python'`` or auto)."""
    if name in (None, "auto"):
        return _compiled if _compiled is not None else _kernels_py
    if name == "python":
        return _kernels_py
    if name == "cython":
        if _compiled is None:
            raise ImportError("the compiled kernel extension lsfm._kernels is not built")
        return _compiled
    raise ValueError(f"unknown kernel backend {name!r}")


_active = backend_module()
cell_average = _active.cell_average
band_halfwidth = _active.band_halfwidth
field_values = _active.field_values
assemble_side = _active.assemble_side
