"""Select the charge-accumulation kernel at import.

The compiled ``_kernel`` extension is used when it was built; otherwise the
numpy implementation in ``_kernel_py``.  Set ``SPIKEMRAM_PURE_PYTHON=1`` to
force the fallback.
"""
import os

from . import _kernel_py

accumulate_py = _kernel_py.accumulate

if os.environ.get("SPIKEMRAM_PURE_PYTHON", "") not in ("", "0"):
    accumulate = accumulate_py
    BACKEND = "python"
else:
    try:
        from ._kernel import accumulate
        BACKEND = "cython"
    except ImportError:
        accumulate = accumulate_py
        BACKEND = "python"

RISE = _kernel_py.RISE
FALL = _kernel_py.FALL
