"""Kernel backend selection.

The numeric inner loops (strided 1D convolutions and nearest-codeword
search) exist twice: a numba-jitted implementation and a pure-numpy one.
Selection order:

* ``WAVETOK_NUMBA=0`` forces the numpy fallback,
* ``WAVETOK_NUMBA=1`` requires numba (ImportError if unavailable),
* unset/auto: numba when importable, numpy otherwise.

Both backends compute the same quantities; they may differ in the last
float bits because summation order differs. ``benchmarks/bench_kernels.py``
times one against the other.
"""

import os

_mode = os.environ.get("WAVETOK_NUMBA", "auto").lower()

if _mode in ("0", "false", "off", "no"):
    from . import numpy_backend as _backend
elif _mode in ("1", "true", "on", "yes"):
    from . import numba_backend as _backend
else:
    try:
        from . import numba_backend as _backend
    except ImportError:
        from . import numpy_backend as _backend

conv1d_fwd = _backend.conv1d_fwd
conv1d_bwd_x = _backend.conv1d_bwd_x
conv1d_bwd_w = _backend.conv1d_bwd_w
nearest_code = _backend.nearest_code


def backend_name() -> str:
    """Name of the active kernel backend ("numba" or "numpy")."""
    return _backend.NAME
