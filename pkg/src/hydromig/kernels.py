"""Kernel selection: compiled extension when importable, NumPy otherwise.

Set ``HYDROMIG_PURE_PYTHON=1`` to force the NumPy path.
"""
import logging
import os

from . import _kernels_py

log = logging.getLogger(__name__)

BACKEND = "python"
_impl = _kernels_py
if os.environ.get("HYDROMIG_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # extension not built
        log.debug("compiled kernels unavailable, using NumPy fallback")

cell_props = _impl.cell_props
pair_fluxes = _impl.pair_fluxes
