"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the pure-Python
module takes over with identical signatures.  Setting ``ELLQG_PURE_PYTHON=1``
forces the fallback (used by the benchmark and the backend parity tests).
"""

import os

from . import _kernels_py

if os.environ.get("ELLQG_PURE_PYTHON") == "1":
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py
        BACKEND = "python"

theta_eval = _impl.theta_eval
theta_many = _impl.theta_many
sym_sum = _impl.sym_sum

__all__ = ["BACKEND", "theta_eval", "theta_many", "sym_sum"]
