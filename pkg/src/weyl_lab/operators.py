"""Operators attached to an orthonormal system on the dyadic grid.

Projections and partial sums, chain maximal functions, Hardy-Littlewood and
dyadic maximal operators, the Haar square function, the blockwise majorant,
and sign modulations.  All act on sampled functions; coefficient vectors are
float64 arrays with position i holding the coefficient of phi_{i+1}, and all
index sets in the public API are 1-based.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .dyadic import DyadicGrid, SampledFunction
from .errors import DomainError, ResourceError, ShapeError
from .systems import OrthonormalSystem

DEFAULT_SEED = 42

# exact maximal-function scans are quadratic in the cell count; past this
# level the windowed 2-approximation takes over (or must be requested
# explicitly at the caller's own risk of hitting the resource cap)
EXACT_MAXAVG_MAX_LEVEL = 12


def _check_grid(f: SampledFunction, system: OrthonormalSystem):
    if f.grid.level != system.grid.level:
        raise ShapeError(
            f"function level {f.grid.level} != system level {system.grid.level}")


def coefficients(f: SampledFunction, system: OrthonormalSystem) -> np.ndarray:
    """All grid inner products <f, phi_k>, k = 1..N."""
    _check_grid(f, system)
    return system.values @ f.values / system.grid.cells


def synthesize(system: OrthonormalSystem, coeffs: np.ndarray) -> SampledFunction:
    """sum_k coeffs[k-1] * phi_k."""
    a = np.asarray(coeffs, dtype=np.float64)
    if a.shape != (system.size,):
        raise ShapeError(f"expected {system.size} coefficients, got {a.shape}")
    return SampledFunction(system.grid, a @ system.values)


def _index_array(G, size: int) -> np.ndarray:
    idx = np.asarray(sorted({int(k) for k in G}), dtype=np.intp)
    if idx.size and (idx[0] < 1 or idx[-1] > size):
        raise DomainError(f"indices must lie in [1, {size}]")
    return idx


def project(f: SampledFunction, system: OrthonormalSystem, G) -> SampledFunction:
    """Projection sum_{k in G} <f, phi_k> phi_k; empty G gives 0."""
    _check_grid(f, system)
    idx = _index_array(G, system.size)
    if idx.size == 0:
        return SampledFunction(f.grid, np.zeros(f.grid.cells))
    rows = system.values[idx - 1]
    a = rows @ f.values / f.grid.cells
    return SampledFunction(f.grid, a @ rows)


def phi_partial(f: SampledFunction, system: OrthonormalSystem, n: int) -> SampledFunction:
    """Partial sum over k <= 2**n (n = 0 gives the phi_1 term alone)."""
    if n < 0 or (1 << n) > system.size:
        raise DomainError(f"need 0 <= n with 2**n <= {system.size}, got {n}")
    return project(f, system, range(1, (1 << n) + 1))


def phi_block(f: SampledFunction, system: OrthonormalSystem, m: int) -> SampledFunction:
    """Block increment over 2**(m-1) < k <= 2**m (m >= 1); k = 1 in no block."""
    if m < 1 or (1 << (m - 1)) >= system.size:
        raise DomainError(f"need m >= 1 with 2**(m-1) < {system.size}, got {m}")
    hi = min(1 << m, system.size)
    return project(f, system, range((1 << (m - 1)) + 1, hi + 1))


def block_range(m: int, size: int) -> range:
    """1-based index range of block m (2**(m-1), 2**m] clipped to the size."""
    return range((1 << (m - 1)) + 1, min(1 << m, size) + 1)


def block_count(size: int) -> int:
    """Number of (possibly partial) blocks covering indices 2..size."""
    return (size - 1).bit_length() if size > 1 else 0


def modulate(coeffs: np.ndarray, lam, system: OrthonormalSystem) -> SampledFunction:
    """sum_k lam_k a_k phi_k for a multiplier sequence with |lam_k| <= 1."""
    a = np.asarray(coeffs, dtype=np.float64)
    l = np.asarray(lam, dtype=np.float64)
    if a.shape != l.shape or a.shape != (system.size,):
        raise ShapeError("coefficients and multipliers must both have length N")
    if l.size and np.max(np.abs(l)) > 1.0 + 1e-15:
        raise DomainError("multipliers must satisfy |lam_k| <= 1")
    return synthesize(system, a * l)


# ---------------------------------------------------------------------------
# index chains and the chain maximal function


@dataclass(frozen=True)
class IndexChain:
    """A finite sequence of nonempty index sets G_1, ..., G_n (1-based)."""

    sets: tuple[frozenset, ...]

    def __post_init__(self):
        if len(self.sets) == 0:
            raise DomainError("a chain needs at least one set")
        for G in self.sets:
            if len(G) == 0:
                raise DomainError("chain sets must be nonempty")
            for k in G:
                if int(k) < 1:
                    raise DomainError("chain indices must be >= 1")

    @classmethod
    def from_sets(cls, sets) -> "IndexChain":
        return cls(tuple(frozenset(int(k) for k in G) for G in sets))

    @classmethod
    def prefixes(cls, order) -> "IndexChain":
        """Singleton-increment chain from an insertion order of indices."""
        order = [int(k) for k in order]
        if len(set(order)) != len(order):
            raise DomainError("insertion order must not repeat indices")
        acc, out = set(), []
        for k in order:
            acc.add(k)
            out.append(frozenset(acc))
        return cls(tuple(out))

    def __len__(self) -> int:
        return len(self.sets)

    @property
    def kind(self) -> str:
        """'singleton' (nested, one new index per step, |G_1| = 1),
        'monotone' (nested), or 'arbitrary'."""
        nested = all(a <= b for a, b in zip(self.sets, self.sets[1:]))
        if not nested:
            return "arbitrary"
        single = len(self.sets[0]) == 1 and all(
            len(b) - len(a) == 1 for a, b in zip(self.sets, self.sets[1:]))
        return "singleton" if single else "monotone"

    def max_index(self) -> int:
        return max(max(G) for G in self.sets)


def chain_maximal(f: SampledFunction, system: OrthonormalSystem,
                  chain: IndexChain) -> SampledFunction:
    """max_k |P_{G_k} f| pointwise over the sets of the chain.

    Nested chains are evaluated incrementally (each set only adds its new
    indices); arbitrary chains recompute each projection.
    """
    _check_grid(f, system)
    if chain.max_index() > system.size:
        raise DomainError(f"chain uses indices beyond N = {system.size}")
    a = coefficients(f, system)
    out = np.zeros(f.grid.cells)
    if chain.kind in ("singleton", "monotone"):
        cur = np.zeros(f.grid.cells)
        prev: frozenset = frozenset()
        for G in chain.sets:
            new = np.asarray(sorted(G - prev), dtype=np.intp)
            if new.size:
                cur = cur + a[new - 1] @ system.values[new - 1]
            np.maximum(out, np.abs(cur), out=out)
            prev = G
    else:
        for G in chain.sets:
            idx = np.asarray(sorted(G), dtype=np.intp)
            vals = a[idx - 1] @ system.values[idx - 1]
            np.maximum(out, np.abs(vals), out=out)
    return SampledFunction(f.grid, out, meta={"kind": chain.kind})


# ---------------------------------------------------------------------------
# Haar analysis on the full grid tree


def haar_transform(f: SampledFunction) -> np.ndarray:
    """Haar coefficients <f, h_k> for all k = 1..2**J, in index order.

    Position 0 is the mean (h_1); positions 2**n-1 .. 2**(n+1)-2 hold level n.
    Works on the rows of a 2-D array as well (one function per row).
    """
    v = f.values if isinstance(f, SampledFunction) else np.asarray(f)
    squeeze = v.ndim == 1
    v = np.atleast_2d(v)
    rows, C = v.shape
    J = C.bit_length() - 1
    out = np.empty_like(v)
    out[:, 0] = v.mean(axis=1)
    avg = v
    for n in range(J - 1, -1, -1):
        pairs = avg.reshape(rows, -1, 2)
        # <f, h_k> = 2**(-n/2-1) (left average - right average), level n
        out[:, (1 << n):(1 << (n + 1))] = (
            (pairs[:, :, 0] - pairs[:, :, 1]) * 2.0 ** (-n / 2.0 - 1.0))
        avg = pairs.mean(axis=2)
    return out[0] if squeeze else out


def haar_synthesize(grid: DyadicGrid, coeffs: np.ndarray) -> SampledFunction:
    """Inverse of `haar_transform` on a full coefficient vector."""
    b = np.asarray(coeffs, dtype=np.float64)
    C = grid.cells
    if b.shape != (C,):
        raise ShapeError(f"expected {C} Haar coefficients, got {b.shape}")
    avg = b[:1].copy()
    for n in range(grid.level):
        nxt = np.repeat(avg, 2)
        amp = b[(1 << n):(1 << (n + 1))] * 2.0 ** (n / 2.0)
        nxt[0::2] += amp
        nxt[1::2] -= amp
        avg = nxt
    return SampledFunction(grid, avg)


def haar_partial(f: SampledFunction, n: int, method: str = "average") -> SampledFunction:
    """Haar partial sum over k <= 2**n.

    'average' uses the identity with conditional averages on level-n cells;
    'coeffs' synthesizes from the truncated coefficient vector.  The two
    agree to rounding.
    """
    J = f.grid.level
    if not 0 <= n <= J:
        raise DomainError(f"need 0 <= n <= {J}, got {n}")
    if method == "average":
        blocks = f.values.reshape(1 << n, -1)
        return SampledFunction(
            f.grid, np.repeat(blocks.mean(axis=1), 1 << (J - n)))
    if method == "coeffs":
        b = haar_transform(f)
        b[(1 << n):] = 0.0
        return haar_synthesize(f.grid, b)
    raise DomainError(f"unknown method {method!r}")


def haar_block(f: SampledFunction, m: int) -> SampledFunction:
    """Haar block increment: partial(2**m) - partial(2**(m-1)), m >= 1."""
    if m < 1:
        raise DomainError(f"block index must be >= 1, got {m}")
    hi = haar_partial(f, m)
    lo = haar_partial(f, m - 1)
    return SampledFunction(f.grid, hi.values - lo.values)


def haar_square_coefficients(grid: DyadicGrid, coeffs) -> SampledFunction:
    """Square function of the polynomial with the given Haar coefficients.

    Depends on the coefficients only through their squares, so multiplying
    them by any sign vector leaves the result exactly unchanged (the
    invariance that makes sign multipliers square-function-neutral).
    """
    b = np.asarray(coeffs, dtype=np.float64)
    C = grid.cells
    if b.shape != (C,):
        raise ShapeError(f"expected {C} coefficients, got {b.shape}")
    s2 = np.full(C, b[0] * b[0])
    for n in range(grid.level):
        lvl = b[(1 << n):(1 << (n + 1))]
        s2 += np.repeat(lvl * lvl, C >> n) * (1 << n)
    return SampledFunction(grid, np.sqrt(s2))


def haar_square(f: SampledFunction) -> SampledFunction:
    """Square function (sum_k <f,h_k>^2 h_k^2)^(1/2) over the full tree.

    Includes the k = 1 term, so constants give |c| rather than 0.
    """
    return haar_square_coefficients(f.grid, haar_transform(f))


def dyadic_maximal(f: SampledFunction) -> SampledFunction:
    """sup over levels n >= 1 of the average of |f| on the level-n cell.

    Level 0 (the global average) is excluded; the grid must have J >= 1.
    """
    J = f.grid.level
    if J < 1:
        raise DomainError("dyadic maximal function needs a grid of level >= 1")
    m = np.abs(f.values)
    best = m.copy()  # level J
    avg = m
    for n in range(J - 1, 0, -1):
        avg = avg.reshape(-1, 2).mean(axis=1)
        np.maximum(best, np.repeat(avg, 1 << (J - n)), out=best)
    return SampledFunction(f.grid, best)


# ---------------------------------------------------------------------------
# Hardy-Littlewood maximal operator


def _window_ladder(C: int) -> list[int]:
    """Window lengths: everything <= 8, then ~sqrt(2) steps, then C itself."""
    Ls = list(range(1, min(8, C) + 1))
    L = 8.0
    while L < C:
        L *= math.sqrt(2.0)
        r = int(round(L))
        if r < C and r > Ls[-1]:
            Ls.append(r)
    if C not in Ls:
        Ls.append(C)
    return Ls


def _maxavg_window(u: np.ndarray) -> np.ndarray:
    """2-approximation of the exact interval-average maximum.

    Scans windows of ladder lengths at quarter-length strides; any interval
    is contained in some scanned window at most (4/3)*sqrt(2) times longer,
    so the result is within a factor 2 of the exact scan (from below) and
    never exceeds it.
    """
    C = u.shape[0]
    S = np.concatenate(([0.0], np.cumsum(u)))
    res = np.array(u, dtype=np.float64, copy=True)  # length-1 windows
    for L in _window_ladder(C):
        if L == 1:
            continue
        if L <= 8:
            avgs = (S[L:] - S[:-L]) / L  # every position
            for off in range(L):
                n = avgs.shape[0]
                np.maximum(res[off:off + n], avgs, out=res[off:off + n])
            continue
        stride = max(1, L // 4)
        starts = list(range(0, C - L + 1, stride))
        if starts[-1] != C - L:
            starts.append(C - L)
        for st in starts:
            avg = (S[st + L] - S[st]) / L
            seg = res[st:st + L]
            np.maximum(seg, avg, out=seg)
    return res


def hl_maximal(f: SampledFunction, q: float = 1.0,
               mode: str = "auto") -> SampledFunction:
    """Hardy-Littlewood maximal function M_q f = sup_I (avg_I |f|^q)^(1/q).

    The supremum runs over intervals with grid-point endpoints containing
    the point (closed at the endpoints, so the value at a cell is the
    maximal average seen from the cell's left edge).  mode 'exact' runs the
    quadratic scan (grid level <= 12), 'window' the factor-2 approximation,
    'auto' picks 'exact' when affordable.  The mode used is recorded in the
    result's meta.
    """
    if not (np.isfinite(q) and q >= 1.0):
        raise DomainError(f"q must satisfy 1 <= q < inf, got {q}")
    if mode not in ("auto", "exact", "window"):
        raise DomainError(f"unknown mode {mode!r}")
    J = f.grid.level
    if mode == "auto":
        mode = "exact" if J <= EXACT_MAXAVG_MAX_LEVEL else "window"
    elif mode == "exact" and J > EXACT_MAXAVG_MAX_LEVEL:
        raise ResourceError(
            f"exact maximal scan needs level <= {EXACT_MAXAVG_MAX_LEVEL}, "
            f"got {J}; use mode='window'")
    u = np.abs(f.values) ** q
    res = _kernels.maxavg_exact(u) if mode == "exact" else _maxavg_window(u)
    out = res ** (1.0 / q) if q != 1.0 else res
    return SampledFunction(f.grid, out, meta={"mode": mode, "q": q})


# ---------------------------------------------------------------------------
# blockwise majorant and modulation suprema


def default_block_q(p: float, delta: float) -> float:
    """q = min{(p+1)/2, (1 - delta/2)^-1, 3/2}; always has q' delta > 1."""
    if not (np.isfinite(p) and p >= 1.0):
        raise DomainError(f"p must satisfy 1 <= p < inf, got {p}")
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0,1), got {delta}")
    return min((p + 1.0) / 2.0, 1.0 / (1.0 - delta / 2.0), 1.5)


def block_majorant(coeffs: np.ndarray, system: OrthonormalSystem,
                   q: float | None = None, p: float | None = None,
                   mode: str = "auto") -> SampledFunction:
    """[sum_m (M_q sum_{block m} |a_k phi_k|)^2]^(1/2).

    Blocks are (2**(m-1), 2**m]; the coefficient of phi_1 does not enter
    (these majorants always normalize it away).  q defaults to
    `default_block_q(p, system.delta)` and must satisfy q >= 1 and, when the
    system's envelope exponent delta is known, q < 1/(1-delta) (equivalent
    to q' delta > 1, which the theory requires).
    """
    a = np.asarray(coeffs, dtype=np.float64)
    if a.shape != (system.size,):
        raise ShapeError(f"expected {system.size} coefficients, got {a.shape}")
    if q is None:
        if p is None or system.delta is None:
            raise DomainError(
                "q not given: need p and a system with a declared delta")
        q = default_block_q(p, system.delta)
    if not (np.isfinite(q) and q >= 1.0):
        raise DomainError(f"q must satisfy 1 <= q < inf, got {q}")
    if system.delta is not None and q >= 1.0 / (1.0 - system.delta):
        raise DomainError(
            f"q = {q} too large for delta = {system.delta}: need q' delta > 1")
    C = system.grid.cells
    acc = np.zeros(C)
    used_mode = None
    for m in range(1, block_count(system.size) + 1):
        idx = np.asarray(block_range(m, system.size), dtype=np.intp)
        g = np.abs(a[idx - 1]) @ np.abs(system.values[idx - 1])
        Mg = hl_maximal(SampledFunction(system.grid, g), q=q, mode=mode)
        used_mode = Mg.meta["mode"]
        acc += Mg.values ** 2
    return SampledFunction(system.grid, np.sqrt(acc),
                           meta={"q": q, "mode": used_mode})


def modulated_square_sup(coeffs: np.ndarray, system: OrthonormalSystem,
                         n_samples: int = 256, seed: int = DEFAULT_SEED,
                         enum_limit: int = 12) -> SampledFunction:
    """Pointwise sup over sign sequences of S(sum_k lam_k a_k phi_k).

    S(.)(x)^2 is a positive semidefinite quadratic form in lam, so the sup
    over [-1,1]^N is attained at sign vertices.  All 2**m vertices are
    enumerated when the active support size m <= enum_limit (the result is
    then exact); otherwise n_samples seeded random vertices plus the all-ones
    vertex are taken.  meta records the vertex count and whether the
    enumeration was exhaustive.
    """
    a = np.asarray(coeffs, dtype=np.float64)
    if a.shape != (system.size,):
        raise ShapeError(f"expected {system.size} coefficients, got {a.shape}")
    active = np.flatnonzero(a)
    C = system.grid.cells
    if active.size == 0:
        return SampledFunction(system.grid, np.zeros(C),
                               meta={"vertices": 0, "exhaustive": True})
    m = active.size
    if m <= enum_limit:
        patterns = np.array(
            [[1.0 if (i >> b) & 1 else -1.0 for b in range(m)]
             for i in range(1 << m)])
        exhaustive = True
    else:
        rng = np.random.default_rng([seed, m])
        patterns = rng.choice([-1.0, 1.0], size=(n_samples, m))
        patterns[0] = 1.0
        exhaustive = False
    rows = a[active, None] * system.values[active]  # (m, C), signed terms
    batch = max(1, (1 << 22) // max(C, 1))
    out = np.zeros(C)
    for s in range(0, patterns.shape[0], batch):
        funcs = patterns[s:s + batch] @ rows
        b = haar_transform(funcs)
        s2 = np.tile((b[:, :1] ** 2), (1, C))
        J = system.grid.level
        for n in range(J):
            lvl = b[:, (1 << n):(1 << (n + 1))]
            s2 += np.repeat(lvl * lvl, C >> n, axis=1) * (1 << n)
        np.maximum(out, np.sqrt(s2).max(axis=0), out=out)
    return SampledFunction(system.grid, out,
                           meta={"vertices": patterns.shape[0],
                                 "exhaustive": exhaustive})


# ---------------------------------------------------------------------------
# seeded generators for experiment ensembles


def random_haar_polynomial(grid: DyadicGrid, levels: int,
                           seed: int = DEFAULT_SEED) -> SampledFunction:
    """Random Haar polynomial with unit-scale martingale increments.

    Coefficient k at level n is drawn as 2**(-n/2) times a standard normal,
    so each level contributes increments of comparable size (a Gaussian
    dyadic walk); the level-0 mean is a standard normal.  Deterministic in
    (seed, levels, grid level).
    """
    if not 0 <= levels <= grid.level:
        raise DomainError(
            f"levels must lie in [0, {grid.level}], got {levels}")
    rng = np.random.default_rng([seed, 11, levels])
    b = np.zeros(grid.cells)
    b[0] = rng.standard_normal()
    for n in range(1, levels + 1):
        lo, hi = 1 << (n - 1), 1 << n
        b[lo:hi] = rng.standard_normal(hi - lo) * 2.0 ** (-n / 2.0)
    return haar_synthesize(grid, b)


def random_step_function(grid: DyadicGrid, pieces: int = 8,
                         seed: int = DEFAULT_SEED) -> SampledFunction:
    """Random step function: `pieces` blocks of equal cell count (the last
    absorbs the remainder), each with a standard-normal value."""
    if pieces < 1 or pieces > grid.cells:
        raise DomainError(
            f"pieces must lie in [1, {grid.cells}], got {pieces}")
    rng = np.random.default_rng([seed, 12, pieces])
    vals = rng.standard_normal(pieces)
    reps = np.full(pieces, grid.cells // pieces)
    reps[-1] += grid.cells - reps.sum()
    return SampledFunction(grid, np.repeat(vals, reps))
