"""Select the kernel implementation at import time.

The compiled ``_kernels`` extension is used when it was built; otherwise the
numpy fallback in ``_kernels_py`` is loaded. Setting ``QRELAY_PURE_PYTHON=1``
forces the fallback.
"""

import os

from . import _kernels_py

if os.environ.get("QRELAY_PURE_PYTHON", "") not in ("", "0"):
    kernels = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels
    except ImportError:
        kernels = _kernels_py
        BACKEND = "python"
    else:
        BACKEND = "cython"
