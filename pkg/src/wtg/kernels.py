"""Select the compiled kernels when available, else the pure-Python ones.

Set ``WTG_PURE_PYTHON=1`` to force the fallback.
"""

import os

from ._kernels_py import NEG, POS

if os.environ.get("WTG_PURE_PYTHON"):
    from . import _kernels_py as _impl
    COMPILED = False
else:
    try:
        from . import _kernels as _impl
        COMPILED = True
    except ImportError:
        from . import _kernels_py as _impl
        COMPILED = False

value_iteration = _impl.value_iteration
floyd_warshall = _impl.floyd_warshall

# Python ints never overflow; the compiled path is only used below this magnitude
SAFE = 1 << 60

__all__ = ["COMPILED", "NEG", "POS", "SAFE", "value_iteration", "floyd_warshall"]
