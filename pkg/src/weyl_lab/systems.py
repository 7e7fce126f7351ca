"""Concrete orthonormal systems on [0,1) and their regularity conditions.

A system is a finite family phi_1..phi_N sampled on a dyadic grid, together
with the localization data the operators need: each index k >= 2 sits at a
dyadic center t_k, and the admissible systems are controlled by the envelope
xi(x) = (1+|x|)^{-(1+delta)} through a size condition, a local smoothness
condition, and a local mass condition.  `verify_wavelet_type` fits the best
constants for those conditions empirically.
"""

import re
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solveh_banded

from .dyadic import DyadicGrid, SampledFunction, make_grid
from .errors import DomainError, FormatError, ResourceError, ShapeError

# Caps: largest system size and the resolution margin a sampled (non-exact)
# construction must keep between size and grid refinement.
MAX_SIZE = 4096
SAMPLED_MARGIN = 4  # require size <= 2**(J - SAMPLED_MARGIN) for Franklin

_NAME_RE = re.compile(r"^[A-Za-z0-9_.\-]+$")


def xi(x, delta: float):
    """The decay envelope (1+|x|)^{-(1+delta)} on the whole line."""
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0,1), got {delta}")
    return (1.0 + np.abs(x)) ** (-(1.0 + delta))


def center(k: int) -> tuple[float, int]:
    """Dyadic center t_k and its level n(k).

    t_1 = 1/2 at level 0; for k = 2**n + j with 1 <= j <= 2**n the center is
    (2j-1)/2**(n+1), i.e. the k-th point of the standard dyadic enumeration
    (midpoint order within each level).
    """
    if k < 1:
        raise DomainError(f"index must be >= 1, got {k}")
    if k == 1:
        return 0.5, 0
    n = (k - 1).bit_length() - 1  # unique n with 2**n < k <= 2**(n+1)
    j = k - (1 << n)
    return (2 * j - 1) / (1 << (n + 1)), n


@dataclass
class OrthonormalSystem:
    """phi_1..phi_N sampled at the midpoints of a dyadic grid.

    ``values[k-1]`` holds phi_k.  ``first_index_special`` marks systems whose
    phi_1 is the constant (so the mean-zero condition starts at k = 2).
    ``delta``/``alpha``/``envelope_constant`` record fitted or declared
    regularity parameters; None means not asserted.
    """

    name: str
    grid: DyadicGrid
    values: np.ndarray
    delta: float | None = None
    alpha: float | None = None
    envelope_constant: float | None = None
    first_index_special: bool = True

    def __post_init__(self):
        if not _NAME_RE.match(self.name):
            raise DomainError(f"system name must match [A-Za-z0-9_.-]+, got {self.name!r}")
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != self.grid.cells:
            raise ShapeError(
                f"values must be (N, {self.grid.cells}), got {v.shape}")
        if v.shape[0] < 1:
            raise ShapeError("system must contain at least one function")
        if v.shape[0] > MAX_SIZE:
            raise ResourceError(f"system size {v.shape[0]} exceeds cap {MAX_SIZE}")
        if not np.all(np.isfinite(v)):
            raise DomainError("system values must be finite")
        self.values = v

    @property
    def size(self) -> int:
        return self.values.shape[0]

    def function(self, k: int) -> SampledFunction:
        """phi_k as a sampled function (1-based index)."""
        if not 1 <= k <= self.size:
            raise DomainError(f"index must be in [1, {self.size}], got {k}")
        return SampledFunction(self.grid, self.values[k - 1].copy())

    def gram_defect(self) -> float:
        """max_{j,k} |<phi_j, phi_k> - delta_jk| in the grid inner product."""
        g = (self.values @ self.values.T) / self.grid.cells
        return float(np.max(np.abs(g - np.eye(self.size))))


def _check_build_args(size: int, grid: DyadicGrid, margin: int):
    if size < 1:
        raise DomainError(f"size must be >= 1, got {size}")
    if size > MAX_SIZE:
        raise ResourceError(f"size {size} exceeds cap {MAX_SIZE}")
    if size > (1 << max(grid.level - margin, 0)):
        raise DomainError(
            f"size {size} exceeds the resolution margin 2**(J-{margin}) "
            f"= {1 << max(grid.level - margin, 0)} at level J = {grid.level}")


def build_haar(size: int, grid: DyadicGrid, delta=None,
               alpha=None) -> OrthonormalSystem:
    """The first `size` Haar functions, exact on the grid.

    h_1 = 1; for k = 2**n + j, h_k is +2**(n/2) on the left half of the
    dyadic interval ((j-1)/2**n, j/2**n) and -2**(n/2) on the right half.
    Requires size <= 2**J so every step sits on cell edges.  The optional
    delta/alpha are recorded on the system as its declared envelope and
    smoothness parameters (checks use them as defaults).
    """
    _check_build_args(size, grid, margin=0)
    C = grid.cells
    V = np.zeros((size, C))
    V[0] = 1.0
    for k in range(2, size + 1):
        t, n = center(k)
        j = k - (1 << n)
        width = C >> n  # cells in the support, >= 2 since k <= 2**J
        lo = (j - 1) * width
        mid = lo + width // 2
        amp = 2.0 ** (n / 2.0)
        V[k - 1, lo:mid] = amp
        V[k - 1, mid:lo + width] = -amp
    return OrthonormalSystem("haar", grid, V, delta=delta, alpha=alpha,
                             first_index_special=True)


def haar_support_cells(k: int, grid: DyadicGrid) -> tuple[int, int, int]:
    """(lo, mid, hi) cell range of h_k: +amp on [lo,mid), -amp on [mid,hi)."""
    C = grid.cells
    if k == 1:
        return 0, C, C
    t, n = center(k)
    j = k - (1 << n)
    width = C >> n
    lo = (j - 1) * width
    return lo, lo + width // 2, lo + width


def _hat_gram_banded(knot_cells: np.ndarray, total_cells: int):
    """Tridiagonal Gram matrix of the cardinal hat functions, grid IP.

    Between consecutive knots spanning c cells the midpoint-rule sums are
    sum((i+1/2)/c)^2 = c/3 - 1/(12c) for the rising/falling parts and
    sum rise*fall = c/6 + 1/(12c); dividing by the total cell count turns
    them into grid means.
    """
    gaps = np.diff(knot_cells).astype(np.float64)
    sq = gaps / 3.0 - 1.0 / (12.0 * gaps)
    cross = gaps / 6.0 + 1.0 / (12.0 * gaps)
    m = len(knot_cells)
    diag = np.zeros(m)
    diag[:-1] += sq      # falling part on the right interval
    diag[1:] += sq       # rising part on the left interval
    return diag / total_cells, cross / total_cells


def build_franklin(size: int, grid: DyadicGrid, delta=None,
                   alpha=None) -> OrthonormalSystem:
    """Gram-Schmidt orthonormalization of the hat-function ladder.

    phi_1 = 1 and phi_2 is the normalized linear function; for m >= 3,
    phi_m orthonormalizes the hat peaked at t_{m-1} (the next point of the
    dyadic enumeration) against the piecewise-linear space over the knots
    already present.  All inner products are grid inner products, so the
    returned family is orthonormal on the grid to machine precision; the
    resolution margin size <= 2**(J-4) keeps it close to the continuous
    system.
    """
    _check_build_args(size, grid, margin=SAMPLED_MARGIN)
    C = grid.cells
    x = grid.midpoints()
    V = np.zeros((size, C))
    V[0] = 1.0
    if size >= 2:
        lin = x - 0.5
        V[1] = lin / np.sqrt(np.mean(lin * lin))
    # knots as cell indices; start with the endpoints {0, 1}
    knot_cells = [0, C]
    for m in range(3, size + 1):
        tau, _ = center(m - 1)
        tc = int(round(tau * C))
        pos = int(np.searchsorted(knot_cells, tc))
        if pos < len(knot_cells) and knot_cells[pos] == tc:
            raise DomainError(f"duplicate knot {tau} at step {m}")
        kl, kr = knot_cells[pos - 1], knot_cells[pos]
        # rhs: the new hat against the two old hats it overlaps
        b = np.zeros(len(knot_cells))
        xs = x[kl:kr]
        w = (kr - kl) / C
        s_vals = np.where(xs < tau, (xs - kl / C) / (tc - kl) * C,
                          (kr / C - xs) / (kr - tc) * C)
        b[pos - 1] = np.sum(s_vals * ((kr / C - xs) / w)) / C
        b[pos] = np.sum(s_vals * ((xs - kl / C) / w)) / C
        diag, off = _hat_gram_banded(np.asarray(knot_cells), C)
        ab = np.zeros((2, len(knot_cells)))
        ab[0, 1:] = off
        ab[1] = diag
        c = solveh_banded(ab, b)
        # knot values of the residual hat - projection
        proj_tau = (c[pos - 1] * (kr - tc) + c[pos] * (tc - kl)) / (kr - kl)
        g_vals = np.concatenate([-c[:pos], [1.0 - proj_tau], -c[pos:]])
        knot_cells.insert(pos, tc)
        vals = np.interp(x, np.asarray(knot_cells) / C, g_vals)
        nrm = np.sqrt(np.mean(vals * vals))
        if nrm == 0.0 or not np.isfinite(nrm):
            raise DomainError(f"degenerate Gram-Schmidt step at m = {m}")
        if g_vals[pos] < 0:
            nrm = -nrm
        V[m - 1] = vals / nrm
    return OrthonormalSystem("franklin", grid, V, delta=delta, alpha=alpha,
                             first_index_special=True)


# ---------------------------------------------------------------------------
# file format


def save_system(system: OrthonormalSystem, path) -> None:
    """Write the WTS1 container: one ASCII header line + float64 LE payload."""
    def fmt(v):
        return "none" if v is None else repr(float(v))

    header = (f"WTS1 name={system.name} N={system.size} J={system.grid.level} "
              f"delta={fmt(system.delta)} alpha={fmt(system.alpha)} "
              f"special_first={1 if system.first_index_special else 0}\n")
    payload = np.ascontiguousarray(system.values, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(payload.tobytes())


_HEADER_RE = re.compile(
    r"^WTS1 name=([A-Za-z0-9_.\-]+) N=(\d+) J=(\d+) "
    r"delta=(none|[^ ]+) alpha=(none|[^ ]+) special_first=([01])$")


def load_system(path, validate: str = "auto") -> OrthonormalSystem:
    """Read a WTS1 container and validate it.

    ``validate``: 'shape' checks header/payload consistency only; 'full'
    additionally checks orthonormality via the full Gram matrix; 'auto'
    (default) does the full check when N^2 * cells is small enough to be
    cheap and a seeded random-probe check otherwise.
    """
    if validate not in ("auto", "full", "shape"):
        raise DomainError(f"unknown validate mode {validate!r}")
    with open(path, "rb") as fh:
        head = fh.readline(4096)
        body = fh.read()
    if not head.endswith(b"\n"):
        raise FormatError("missing or overlong header line")
    try:
        text = head[:-1].decode("ascii")
    except UnicodeDecodeError as exc:
        raise FormatError(f"header is not ASCII: {exc}") from None
    m = _HEADER_RE.match(text)
    if m is None:
        raise FormatError(f"malformed header: {text!r}")
    name, n_s, j_s, d_s, a_s, sf = m.groups()
    N, J = int(n_s), int(j_s)
    if J > 24:
        raise ResourceError(f"grid level {J} exceeds cap 24")
    if N > MAX_SIZE:
        raise ResourceError(f"system size {N} exceeds cap {MAX_SIZE}")
    if N < 1:
        raise FormatError("system size must be >= 1")

    def parse(s):
        if s == "none":
            return None
        try:
            v = float(s)
        except ValueError:
            raise FormatError(f"bad float field {s!r}") from None
        if not np.isfinite(v):
            raise FormatError(f"non-finite parameter {s!r}")
        return v

    delta, alpha = parse(d_s), parse(a_s)
    cells = 1 << J
    expected = N * cells * 8
    if len(body) != expected:
        raise FormatError(
            f"payload holds {len(body)} bytes, header implies {expected}")
    vals = np.frombuffer(body, dtype="<f8").astype(np.float64).reshape(N, cells)
    if not np.all(np.isfinite(vals)):
        raise FormatError("payload contains non-finite values")
    sys = OrthonormalSystem(name, make_grid(J), vals, delta=delta, alpha=alpha,
                            first_index_special=(sf == "1"))
    _validate_orthonormal(sys, validate)
    return sys


def _validate_orthonormal(sys: OrthonormalSystem, mode: str, tol: float = 1e-8):
    if mode == "shape":
        return
    full = mode == "full" or sys.size ** 2 * sys.grid.cells <= 1 << 28
    if full:
        defect = sys.gram_defect()
        if defect > tol:
            raise FormatError(
                f"system is not orthonormal: Gram defect {defect:.3e} > {tol}")
        return
    # probe check: V (V^T z) / cells ~ z for seeded unit probes
    rng = np.random.default_rng(0)
    for _ in range(8):
        z = rng.standard_normal(sys.size)
        w = sys.values @ (sys.values.T @ z) / sys.grid.cells
        if np.max(np.abs(w - z)) > tol * sys.size:
            raise FormatError("system fails the orthonormality probe check")


# ---------------------------------------------------------------------------
# condition verification


@dataclass
class ConditionReport:
    """Fitted constants for the admissibility conditions of one system.

    decay/holder constants are the empirical suprema of the defining ratios;
    they are always finite on a fixed grid, so their pass flags only assert
    finiteness.  Divergence (e.g. the Haar system under the smoothness
    condition) shows up as growth of the constant under grid refinement,
    which callers assess by verifying the same family rebuilt one level
    deeper.
    """

    name: str
    size: int
    level: int
    delta: float
    alpha: float
    mean_zero_max: float
    decay_constant: float
    decay_witness: dict
    holder_constant: float
    holder_witness: dict
    local_mass_radius: float
    local_mass_witness: dict
    mean_zero_pass: bool
    decay_pass: bool
    holder_pass: bool
    local_mass_pass: bool
    mean_zero_tol: float = 1e-8

    @property
    def passed(self) -> bool:
        return (self.mean_zero_pass and self.decay_pass and self.holder_pass
                and self.local_mass_pass)


def verify_wavelet_type(system: OrthonormalSystem, delta: float, alpha: float,
                        *, mean_zero_tol: float = 1e-8,
                        holder_offsets: str = "ladder") -> ConditionReport:
    """Fit the admissibility constants of a system against envelope xi.

    Checks, for every k (k >= 2 when the first index is the constant):
      * mean zero: |integral of phi_k| <= tol;
      * size: |phi_k(x)| <= c * 2**(n/2) xi(2**n (x - t_k)), fitting c;
      * smoothness: |phi_k(t) - phi_k(t')| <= c 2**(n/2) (2**n |t-t'|)**alpha
        * xi(2**n (t - t_k)) over pairs with |t - t'| <= 2**-n, fitting c
        (both roles of the pair are taken as t);
      * local mass: smallest grid-aligned a with the squared mass of phi_k
        within distance a * 2**-n of t_k at least 1/2, maximized over k.

    ``holder_offsets``: 'ladder' tests midpoint pairs at dyadic cell offsets
    1, 2, 4, ..., 2**(J-n) (each direction); 'all' tests every admissible
    offset.  The ladder hits the extreme offsets, which carry the supremum
    for jump discontinuities (smallest offset) and for low Holder exponents
    (largest offset).
    """
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0,1), got {delta}")
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha must lie in (0,1], got {alpha}")
    if holder_offsets not in ("ladder", "all"):
        raise DomainError(f"unknown holder_offsets mode {holder_offsets!r}")
    grid = system.grid
    J = grid.level
    C = grid.cells
    x = grid.midpoints()
    k0 = 2 if system.first_index_special else 1

    mz = 0.0
    if system.size >= k0:
        mz = float(np.max(np.abs(np.mean(system.values[k0 - 1:], axis=1))))

    dec_best, dec_wit = 0.0, {}
    hol_best, hol_wit = 0.0, {}
    mass_a, mass_wit = 0.0, {}
    for k in range(k0, system.size + 1):
        t, n = center(k)
        row = system.values[k - 1]
        env = 2.0 ** (n / 2.0) * xi((x - t) * (1 << n), delta)
        ratio = np.abs(row) / env
        i = int(np.argmax(ratio))
        if ratio[i] > dec_best:
            dec_best = float(ratio[i])
            dec_wit = {"k": k, "x": float(x[i]), "lhs": float(abs(row[i])),
                       "rhs": float(env[i])}

        max_off = C >> n  # cell offsets with |t - t'| <= 2**-n
        offsets = []
        d = 1
        while d < max_off:
            offsets.append(d)
            d *= 2
        offsets.append(max_off)
        if holder_offsets == "all":
            offsets = list(range(1, max_off + 1))
        for d in offsets:
            if d >= C:
                break
            diff = np.abs(row[d:] - row[:-d])
            scale = 2.0 ** (n / 2.0) * ((1 << n) * d / C) ** alpha
            for role, sl in (("left", slice(0, C - d)), ("right", slice(d, C))):
                r = diff / (scale * xi((x[sl] - t) * (1 << n), delta))
                i = int(np.argmax(r))
                if r[i] > hol_best:
                    hol_best = float(r[i])
                    xi_t = float(x[sl][i])
                    hol_wit = {"k": k, "t": xi_t,
                               "t_prime": float(xi_t + d / C if role == "left"
                                                else xi_t - d / C),
                               "offset_cells": d, "lhs": float(diff[i])}

        # local mass: cumulative |phi_k|^2 around the center, cell-aligned
        w2 = row * row / C
        ct = int(round(t * C))
        target = 0.5 * np.sum(w2)
        acc = 0.0
        steps = 0
        while acc < target and steps <= C:
            steps += 1
            lo2, hi2 = max(ct - steps, 0), min(ct + steps, C)
            acc = float(np.sum(w2[lo2:hi2]))
        a_k = steps * (1 << n) / C
        if a_k > mass_a:
            mass_a = a_k
            mass_wit = {"k": k, "radius": steps / C, "a": a_k}

    if system.size < k0:  # only the constant present
        dec_wit = hol_wit = mass_wit = {}

    return ConditionReport(
        name=system.name, size=system.size, level=J, delta=delta, alpha=alpha,
        mean_zero_max=mz,
        decay_constant=dec_best, decay_witness=dec_wit,
        holder_constant=hol_best, holder_witness=hol_wit,
        local_mass_radius=mass_a, local_mass_witness=mass_wit,
        mean_zero_pass=bool(mz <= mean_zero_tol),
        decay_pass=bool(np.isfinite(dec_best)),
        holder_pass=bool(np.isfinite(hol_best)),
        local_mass_pass=bool(mass_a > 0.0 or system.size < k0),
        mean_zero_tol=mean_zero_tol,
    )
