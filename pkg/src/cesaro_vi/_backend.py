"""Kernel backend selection.

The compiled extension is used when importable; setting the environment
variable ``CESARO_VI_PURE_PYTHON=1`` forces the numpy fallback.
"""
import os

from . import _pykernels

kernels = _pykernels
BACKEND = "python"

if not os.environ.get("CESARO_VI_PURE_PYTHON"):
    try:
        from . import _kernels as kernels  # noqa: F811

        BACKEND = "cython"
    except ImportError:  # extension not built
        pass
