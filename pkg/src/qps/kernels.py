"""Backend selection for the hot loops.

The compiled extension is used when importable; setting ``QPS_PURE_PYTHON=1``
forces the numpy fallback.  ``BACKEND`` names the active choice.
"""
import os

from . import _pykernels

if os.environ.get("QPS_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

grid_log_norms = _impl.grid_log_norms
sturm_counts = _impl.sturm_counts
