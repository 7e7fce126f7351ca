"""Backend selector for the hot kernels.

Prefers the compiled extension (weyl_lab._core) when it imported cleanly;
falls back to the numpy implementations otherwise.  Setting the environment
variable WEYL_LAB_PURE=1 forces the fallback, which is how the benchmark
and the parity tests pin a backend.
"""

import os

import numpy as np

from . import _fallback

if os.environ.get("WEYL_LAB_PURE", "") not in ("", "0"):
    _core = None
else:
    try:
        from . import _core
    except ImportError:
        _core = None

BACKEND = "compiled" if _core is not None else "python"


def backend_name() -> str:
    return BACKEND


def maxavg_exact(cell_values: np.ndarray) -> np.ndarray:
    v = np.ascontiguousarray(cell_values, dtype=np.float64)
    if _core is not None:
        return _core.maxavg_exact(v)
    return _fallback.maxavg_exact(v)


def chain_runmax_haar(lo, mid, hi, amp, cells: int) -> np.ndarray:
    if _core is not None:
        return _core.chain_runmax_haar(
            np.ascontiguousarray(lo, dtype=np.intp),
            np.ascontiguousarray(mid, dtype=np.intp),
            np.ascontiguousarray(hi, dtype=np.intp),
            np.ascontiguousarray(amp, dtype=np.float64),
            cells)
    return _fallback.chain_runmax_haar(lo, mid, hi, amp, cells)
