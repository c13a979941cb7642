"""Backend selection for the hot numeric kernels.

The numba JIT backend is used by default. Setting the environment variable
``EVWAVE_NO_NUMBA=1`` before import selects the pure-numpy fallback, which
is handy for debugging and for machines without a working LLVM toolchain.
Both backends implement identical signatures and are compared head-to-head
by ``benchmarks/backend_bench.py``.
"""

import os

_FORCE_NUMPY = os.environ.get("EVWAVE_NO_NUMBA", "") not in ("", "0")

if _FORCE_NUMPY:
    from . import numpy_impl as _impl

    BACKEND = "numpy"
else:
    try:
        from . import numba_impl as _impl

        BACKEND = "numba"
    except ImportError:
        from . import numpy_impl as _impl

        BACKEND = "numpy"

conv2d_core = _impl.conv2d_core
polarity_accumulate = _impl.polarity_accumulate

__all__ = ["BACKEND", "conv2d_core", "polarity_accumulate"]
