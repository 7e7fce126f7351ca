"""Pure-numpy implementations of the hot kernels.

These are the reference implementations; `weyl_lab._core` (Cython) mirrors
them exactly and is preferred at import time when available.  Both operate
on plain float64 arrays so they can be cross-checked element for element.
"""

import numpy as np


def maxavg_exact(cell_values: np.ndarray) -> np.ndarray:
    """Per-cell maximum of interval averages over all grid intervals.

    For each cell i, maximizes (S[b]-S[a])/(b-a) over grid endpoints
    0 <= a < b <= n with a <= i <= b, where S is the prefix sum of
    ``cell_values``.  Intervals touching cell i at either endpoint are
    admissible, which makes the result equal to the (one-sided limit of
    the) continuous maximal average at the cell's left edge for
    cell-constant data.  O(n^2).
    """
    v = np.ascontiguousarray(cell_values, dtype=np.float64)
    n = v.shape[0]
    S = np.empty(n + 1)
    S[0] = 0.0
    np.cumsum(v, out=S[1:])
    res = np.full(n, -np.inf)
    for a in range(n):
        # averages over [a, b] for b = a+1 .. n
        vals = (S[a + 1:] - S[a]) / np.arange(1, n - a + 1, dtype=np.float64)
        # intervals containing cell i (a <= i < b): suffix max over b >= i+1
        suff = np.maximum.accumulate(vals[::-1])[::-1]
        np.maximum(res[a:], suff, out=res[a:])
        # intervals [a, b] ending exactly at cell i's left edge (b = i > a)
        if a + 1 < n:
            np.maximum(res[a + 1:], vals[:n - a - 1], out=res[a + 1:])
    return res


def chain_runmax_haar(lo, mid, hi, amp, cells: int) -> np.ndarray:
    """Running maximum of |partial sums| for a Haar-polynomial chain.

    Term t adds +amp[t] on cells [lo[t], mid[t]) and -amp[t] on
    [mid[t], hi[t]).  After each term the running max of the absolute
    partial sum is updated on the touched cells only.
    """
    cur = np.zeros(cells)
    run = np.zeros(cells)
    for t in range(len(amp)):
        l, m, h, a = int(lo[t]), int(mid[t]), int(hi[t]), float(amp[t])
        cur[l:m] += a
        if m < h:
            cur[m:h] -= a
        seg = np.abs(cur[l:h])
        np.maximum(run[l:h], seg, out=run[l:h])
    return run
