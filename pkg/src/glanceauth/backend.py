"""Selects the numeric kernel implementation at import time.

The compiled extension is preferred when it was built; otherwise the numpy
fallback is used. BACKEND names the active implementation ("compiled" or
"python"). Set GLANCEAUTH_FORCE_PYTHON=1 to skip the extension.
"""

import os

from glanceauth import _kernels_py

if os.environ.get("GLANCEAUTH_FORCE_PYTHON") == "1":
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from glanceauth import _kernels as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

resample_grid = _impl.resample_grid
moments = _impl.moments
sweep_bits = _impl.sweep_bits
