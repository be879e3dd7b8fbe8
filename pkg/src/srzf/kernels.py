"""Kernel backend selection.

The compiled extension ``srzf._ckernels`` is used when it imports; otherwise
(or when ``SRZF_PURE_PYTHON=1``) the numpy implementation in
``srzf._kernels_py`` is used. ``BACKEND`` names the active one.
"""

import os

from . import _kernels_py

_impl = _kernels_py
BACKEND = "python"

if os.environ.get("SRZF_PURE_PYTHON", "0") in ("", "0"):
    try:
        from . import _ckernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        pass

srzf_columns = _impl.srzf_columns
block_rates = _impl.block_rates

__all__ = ["BACKEND", "srzf_columns", "block_rates"]
