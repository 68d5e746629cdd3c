"""Kernel backend selection.

Prefers the compiled Cython kernels when the extension was built; otherwise
uses the numpy fallbacks. Set FINGERTIP_PURE_PYTHON=1 to force the fallback
(useful for benchmarking and for debugging the compiled path).
"""

import os

from fingertip import _kernels_py

if os.environ.get("FINGERTIP_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from fingertip import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND_NAME

moving_rms = _impl.moving_rms
binary_runs = _impl.binary_runs
merge_runs = _impl.merge_runs
