"""Backend selection for the hot kernels.

The compiled extension is used when it was built; otherwise the pure-Python
implementation is used. Set ``HYPERQUADRIC_PURE_PYTHON=1`` to force the
fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
cluster_sum = _kernels_py.cluster_sum

if os.environ.get("HYPERQUADRIC_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        cluster_sum = _compiled.cluster_sum
        BACKEND = "cython"

__all__ = ["BACKEND", "cluster_sum"]
