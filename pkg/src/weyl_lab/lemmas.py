"""Empirical constant fitting for the supporting inequality suite.

Each check evaluates one inequality LHS <= c * RHS on a deterministic sample
set and reports the supremum of LHS/RHS together with a witness at the
argmax.  Ratios use the convention 0/0 = 0; a positive LHS against a zero
RHS yields inf, which no admissible input produces.  All checks are
deterministic given (seed, grid level, system, parameters); the stability of
a fitted constant is assessed by re-running the same check on the same
family rebuilt one refinement level deeper.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .dyadic import SampledFunction, lp_norm
from .errors import DomainError, ShapeError
from .operators import (DEFAULT_SEED, block_count, block_range, coefficients,
                        dyadic_maximal, haar_block, haar_partial, haar_square,
                        haar_synthesize, hl_maximal, phi_block, project,
                        synthesize)
from .systems import OrthonormalSystem, build_haar, center, xi

SAMPLE_POINTS = 512  # per-axis sample lattice shared by all checks


@dataclass
class ConstantEstimate:
    """Fitted constant: the supremum of LHS/RHS over the sample set."""

    name: str
    ratio_sup: float
    witness: dict
    samples: int
    level: int

    def as_dict(self) -> dict:
        return {"name": self.name, "ratio_sup": self.ratio_sup,
                "witness": self.witness, "samples": self.samples,
                "level": self.level}


def _ratio(lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Elementwise lhs/rhs with 0/0 -> 0 and positive/0 -> inf."""
    lhs = np.asarray(lhs, dtype=np.float64)
    rhs = np.asarray(rhs, dtype=np.float64)
    out = np.zeros(np.broadcast_shapes(lhs.shape, rhs.shape))
    lhs, rhs = np.broadcast_arrays(lhs, rhs)
    pos = rhs > 0
    out[pos] = lhs[pos] / rhs[pos]
    out[(~pos) & (lhs > 0)] = np.inf
    return out


def sample_cells(level: int, count: int = SAMPLE_POINTS) -> np.ndarray:
    """Cells containing the fixed points (i+1/2)/count, i = 0..count-1.

    The points are independent of the grid level, so checks stay comparable
    across refinement.  When the grid is coarser than the lattice the cells
    simply repeat.
    """
    pts = (np.arange(count) + 0.5) / count
    return np.minimum((pts * (1 << level)).astype(np.intp), (1 << level) - 1)


def _delta_of(system: OrthonormalSystem, delta):
    d = system.delta if delta is None else delta
    if d is None:
        raise DomainError("no delta: give one or use a system that declares it")
    if not 0.0 < d < 1.0:
        raise DomainError(f"delta must lie in (0,1), got {d}")
    return float(d)


def _alpha_of(system: OrthonormalSystem, alpha):
    a = system.alpha if alpha is None else alpha
    if a is None:
        raise DomainError("no alpha: give one or use a system that declares it")
    if not 0.0 < a <= 1.0:
        raise DomainError(f"alpha must lie in (0,1], got {a}")
    return float(a)


def _check_block(system: OrthonormalSystem, m: int):
    if m < 1 or (1 << (m - 1)) >= system.size:
        raise DomainError(f"block {m} is empty for system size {system.size}")


# ---------------------------------------------------------------------------
# kernel and block-level size estimates


def check_kernel_block(system: OrthonormalSystem, m: int, delta=None,
                       points: int = SAMPLE_POINTS) -> ConstantEstimate:
    """Block kernel bound: sum over block m of |phi_k(x) phi_k(t)| against
    the envelope 2**m xi(2**m (x - t)), sampled on a points x points lattice."""
    _check_block(system, m)
    d = _delta_of(system, delta)
    J = system.grid.level
    cells = sample_cells(J, points)
    x = system.grid.midpoints()[cells]
    idx = np.asarray(block_range(m, system.size), dtype=np.intp)
    V = np.abs(system.values[idx - 1][:, cells])  # block values at samples
    lhs = V.T @ V  # lhs[i,j] = sum_k |phi_k(x_i)| |phi_k(x_j)|
    rhs = (1 << m) * xi((x[:, None] - x[None, :]) * (1 << m), d)
    r = _ratio(lhs, rhs)
    i, j = np.unravel_index(np.argmax(r), r.shape)
    wit = {"x": float(x[i]), "t": float(x[j]), "lhs": float(lhs[i, j]),
           "rhs": float(rhs[i, j]), "m": m}
    return ConstantEstimate("kernel_block_envelope", float(r[i, j]), wit,
                            r.size, J)


def _haar_block_combo(system: OrthonormalSystem, coeffs: np.ndarray,
                      m: int) -> SampledFunction:
    """sum over block m of a_k h_k on the system's grid."""
    C = system.grid.cells
    b = np.zeros(C)
    idx = np.asarray(block_range(m, system.size), dtype=np.intp)
    b[idx - 1] = coeffs[idx - 1]
    return haar_synthesize(system.grid, b)


def check_block_domination(system: OrthonormalSystem, coeffs: np.ndarray,
                           m: int, mode: str = "auto") -> dict:
    """Two-sided comparison of a coefficient block against its Haar image.

    'terms_by_haar_maximal': sum_block |a_k phi_k(x)| against
    M(sum_block a_k h_k)(x); 'haar_maximal_by_term_maximal': the latter's
    argument against M(sum_block |a_k phi_k|)(x).  Both are evaluated at
    every grid cell.
    """
    _check_block(system, m)
    a = np.asarray(coeffs, dtype=np.float64)
    if a.shape != (system.size,):
        raise ShapeError(f"expected {system.size} coefficients, got {a.shape}")
    J = system.grid.level
    idx = np.asarray(block_range(m, system.size), dtype=np.intp)
    terms = np.abs(a[idx - 1, None] * system.values[idx - 1])
    abs_sum = terms.sum(axis=0)  # sum |a_k phi_k|
    haar_comb = _haar_block_combo(system, a, m)
    m_haar = hl_maximal(haar_comb, q=1.0, mode=mode).values
    m_abs = hl_maximal(SampledFunction(system.grid, abs_sum), q=1.0,
                       mode=mode).values

    out = {}
    r1 = _ratio(abs_sum, m_haar)
    i = int(np.argmax(r1))
    out["terms_by_haar_maximal"] = ConstantEstimate(
        "terms_by_haar_maximal", float(r1[i]),
        {"x": float(system.grid.midpoints()[i]), "lhs": float(abs_sum[i]),
         "rhs": float(m_haar[i]), "m": m}, r1.size, J)
    r2 = _ratio(m_haar, m_abs)
    i = int(np.argmax(r2))
    out["haar_maximal_by_term_maximal"] = ConstantEstimate(
        "haar_maximal_by_term_maximal", float(r2[i]),
        {"x": float(system.grid.midpoints()[i]), "lhs": float(m_haar[i]),
         "rhs": float(m_abs[i]), "m": m}, r2.size, J)
    return out


def check_indicator_decay(system: OrthonormalSystem, m: int,
                          interval: tuple[float, float], delta=None) -> dict:
    """Decay of the block projection of an indicator 1_[a,b).

    'edge_decay': |block_m(1_I)(x)| against (1+2**m|x-a|)^-delta
    + (1+2**m|x-b|)^-delta everywhere; 'far_field': the same LHS against
    2**m |I| xi(2**m (x-a)) outside the concentric double of I.
    """
    _check_block(system, m)
    d = _delta_of(system, delta)
    a, b = float(interval[0]), float(interval[1])
    if not (0.0 <= a < b <= 1.0):
        raise DomainError(f"need 0 <= a < b <= 1, got [{a}, {b})")
    J = system.grid.level
    x = system.grid.midpoints()
    f = SampledFunction.indicator(system.grid, a, b)
    g = np.abs(phi_block(f, system, m).values)

    rhs1 = ((1.0 + (1 << m) * np.abs(x - a)) ** -d
            + (1.0 + (1 << m) * np.abs(x - b)) ** -d)
    r1 = _ratio(g, rhs1)
    i = int(np.argmax(r1))
    out = {"edge_decay": ConstantEstimate(
        "edge_decay", float(r1[i]),
        {"x": float(x[i]), "lhs": float(g[i]), "rhs": float(rhs1[i]), "m": m},
        r1.size, J)}

    mid, half = (a + b) / 2.0, (b - a) / 2.0
    outside = np.abs(x - mid) > 2.0 * half  # complement of the doubled interval
    if np.any(outside):
        rhs2 = (1 << m) * (b - a) * xi((x[outside] - a) * (1 << m), d)
        r2 = _ratio(g[outside], rhs2)
        i = int(np.argmax(r2))
        wit = {"x": float(x[outside][i]), "lhs": float(g[outside][i]),
               "rhs": float(rhs2[i]), "m": m}
        est = ConstantEstimate("far_field", float(r2[i]), wit, int(r2.size), J)
    else:
        est = ConstantEstimate("far_field", 0.0, {}, 0, J)
    out["far_field"] = est
    return out


# ---------------------------------------------------------------------------
# interaction of Haar partial sums with block projections


def check_interaction_fine_by_coarse(system: OrthonormalSystem,
                                     coeffs: np.ndarray, m: int, n: int,
                                     alpha=None, mode: str = "auto") -> ConstantEstimate:
    """Haar block n of a coefficient-block-m function, n >= m >= 1:
    |DH_n(block_m g)(x)| against 2**(alpha (m-n)) M(sum_block |a_k phi_k|)(x)."""
    _check_block(system, m)
    if not 1 <= m <= n:
        raise DomainError(f"need n >= m >= 1, got n={n}, m={m}")
    if n > system.grid.level:
        raise DomainError(f"Haar level {n} exceeds grid level {system.grid.level}")
    al = _alpha_of(system, alpha)
    a = np.asarray(coeffs, dtype=np.float64)
    idx = np.asarray(block_range(m, system.size), dtype=np.intp)
    gm = SampledFunction(system.grid,
                         a[idx - 1] @ system.values[idx - 1])
    lhs = np.abs(haar_block(gm, n).values)
    abs_sum = np.abs(a[idx - 1]) @ np.abs(system.values[idx - 1])
    maj = hl_maximal(SampledFunction(system.grid, abs_sum), q=1.0, mode=mode)
    rhs = 2.0 ** (al * (m - n)) * maj.values
    r = _ratio(lhs, rhs)
    i = int(np.argmax(r))
    wit = {"x": float(system.grid.midpoints()[i]), "lhs": float(lhs[i]),
           "rhs": float(rhs[i]), "m": m, "n": n}
    return ConstantEstimate("fine_haar_of_coarse_block", float(r[i]), wit,
                            r.size, system.grid.level)


def check_interaction_coarse_by_fine(system: OrthonormalSystem,
                                     coeffs: np.ndarray, m: int, n: int,
                                     q: float | None = None, delta=None,
                                     mode: str = "auto") -> ConstantEstimate:
    """Haar partial sum at level n of a block-m function, m >= n >= 1:
    |H_n(block_m f)(x)| against 2**((n-m)/q') M_q(block_m f)(x), q' > 1/delta."""
    _check_block(system, m)
    if not 1 <= n <= m:
        raise DomainError(f"need m >= n >= 1, got n={n}, m={m}")
    if n > system.grid.level:
        raise DomainError(f"Haar level {n} exceeds grid level {system.grid.level}")
    d = _delta_of(system, delta)
    if q is None:
        q = min(1.5, 1.0 / (1.0 - d / 2.0))
    if not q > 1.0:
        raise DomainError(f"q must be > 1, got {q}")
    qp = q / (q - 1.0)
    if qp <= 1.0 / d:
        raise DomainError(f"need q' > 1/delta: q'={qp}, delta={d}")
    a = np.asarray(coeffs, dtype=np.float64)
    idx = np.asarray(block_range(m, system.size), dtype=np.intp)
    gm = SampledFunction(system.grid, a[idx - 1] @ system.values[idx - 1])
    lhs = np.abs(haar_partial(gm, n).values)
    rhs = 2.0 ** ((n - m) / qp) * hl_maximal(gm, q=q, mode=mode).values
    r = _ratio(lhs, rhs)
    i = int(np.argmax(r))
    wit = {"x": float(system.grid.midpoints()[i]), "lhs": float(lhs[i]),
           "rhs": float(rhs[i]), "m": m, "n": n, "q": q}
    return ConstantEstimate("coarse_average_of_fine_block", float(r[i]), wit,
                            r.size, system.grid.level)


# ---------------------------------------------------------------------------
# norm-level inequalities


def check_littlewood_paley(system: OrthonormalSystem, f: SampledFunction,
                           p: float, sign_samples: int = 64,
                           seed: int = DEFAULT_SEED) -> dict:
    """Littlewood-Paley package for one function.

    'block_square_by_norm': the block square function's L^p norm against
    ||f||_p.  'diagonal_square_by_randomized' / 'randomized_by_diagonal':
    the two sides of the equivalence between ||(sum a_k^2 phi_k^2)^(1/2)||_p^p
    and the sign-averaged ||sum r_k a_k phi_k||_p^p (Rademacher means are
    approximated by seeded sign samples).  'randomized_by_norm': the
    sign-averaged quantity against ||f||_p^p.
    """
    if not p > 1.0:
        raise DomainError(f"p must be > 1, got {p}")
    a = coefficients(f, system)
    J = system.grid.level
    fnorm = lp_norm(f, p)

    sq = np.zeros(system.grid.cells)
    for m in range(1, block_count(system.size) + 1):
        idx = np.asarray(block_range(m, system.size), dtype=np.intp)
        blk = np.abs(a[idx - 1]) @ np.abs(system.values[idx - 1])
        sq += blk * blk
    lhs_block = lp_norm(SampledFunction(system.grid, np.sqrt(sq)), p)
    out = {"block_square_by_norm": ConstantEstimate(
        "block_square_by_norm", float(_ratio(lhs_block, fnorm)),
        {"lhs": lhs_block, "rhs": fnorm, "p": p}, 1, J)}

    a_tail = a.copy()
    a_tail[0] = 0.0  # the diagonal square sum starts at k = 2
    diag = np.sqrt((a_tail * a_tail) @ (system.values * system.values))
    diag_p = lp_norm(SampledFunction(system.grid, diag), p) ** p
    rng = np.random.default_rng([seed, 101])
    signs = rng.choice([-1.0, 1.0], size=(sign_samples, system.size))
    rad = float(np.mean([
        lp_norm(synthesize(system, s * a_tail), p) ** p for s in signs]))
    out["diagonal_square_by_randomized"] = ConstantEstimate(
        "diagonal_square_by_randomized", float(_ratio(diag_p, rad)),
        {"lhs": diag_p, "rhs": rad, "p": p}, sign_samples, J)
    out["randomized_by_diagonal_square"] = ConstantEstimate(
        "randomized_by_diagonal_square", float(_ratio(rad, diag_p)),
        {"lhs": rad, "rhs": diag_p, "p": p}, sign_samples, J)
    out["randomized_by_norm"] = ConstantEstimate(
        "randomized_by_norm", float(_ratio(rad, fnorm ** p)),
        {"lhs": rad, "rhs": fnorm ** p, "p": p}, sign_samples, J)
    return out


def check_convolution_inequality(a, b) -> ConstantEstimate:
    """l2-l1 convolution bound: ||(sum_k |a_k b_{n-k}|)_n||_2 against
    ||a||_2 ||b||_1.  The constant is exactly 1 (Minkowski)."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.size == 0 or b.size == 0:
        raise DomainError("sequences must be nonempty")
    conv = np.convolve(np.abs(a), np.abs(b))
    lhs = float(np.sqrt(np.sum(conv * conv)))
    rhs = float(np.sqrt(np.sum(a * a)) * np.sum(np.abs(b)))
    return ConstantEstimate("convolution_l2_l1",
                            float(_ratio(lhs, rhs)),
                            {"lhs": lhs, "rhs": rhs, "len_a": int(a.size),
                             "len_b": int(b.size)}, 1, 0)


def check_vector_maximal(family, p: float, q: float = 1.0,
                         mode: str = "auto") -> ConstantEstimate:
    """Vector-valued maximal bound: ||(sum (M_q g_i)^2)^(1/2)||_p against
    ||(sum g_i^2)^(1/2)||_p, for 1 <= q < min{2, p}."""
    family = list(family)
    if not family:
        raise DomainError("family must be nonempty")
    if not p > 1.0:
        raise DomainError(f"p must be > 1, got {p}")
    if not 1.0 <= q < min(2.0, p):
        raise DomainError(f"need 1 <= q < min(2, p); q={q}, p={p}")
    grid = family[0].grid
    num = np.zeros(grid.cells)
    den = np.zeros(grid.cells)
    for g in family:
        if g.grid.level != grid.level:
            raise ShapeError("family members must share one grid")
        num += hl_maximal(g, q=q, mode=mode).values ** 2
        den += g.values ** 2
    lhs = lp_norm(SampledFunction(grid, np.sqrt(num)), p)
    rhs = lp_norm(SampledFunction(grid, np.sqrt(den)), p)
    return ConstantEstimate("vector_maximal", float(_ratio(lhs, rhs)),
                            {"lhs": lhs, "rhs": rhs, "p": p, "q": q,
                             "family": len(family)}, len(family), grid.level)


# ---------------------------------------------------------------------------
# good-lambda comparison of the dyadic maximal and square functions


@dataclass
class GoodLambdaReport:
    """Measure table for |{M^d f > lam, Sf < eps lam}| vs |{M^d f > lam/2}|.

    rows: (eps, lam, lhs_measure, rhs_measure, ratio).  fitted_c and r2 come
    from the per-report regression of log(ratio) on 1/eps^2 over rows with
    positive numerator and denominator (nan when fewer than two such rows).
    """

    rows: list
    level: int
    fitted_c: float
    r2: float

    def as_dict(self) -> dict:
        return {"rows": [list(r) for r in self.rows], "level": self.level,
                "fitted_c": self.fitted_c, "r2": self.r2}


def cww_regression(rows) -> tuple[float, float]:
    """Fit log(ratio) = intercept - c / eps^2; returns (c, r2).

    Rows with zero numerator or denominator carry no log information and
    are skipped.  Requires two distinct eps values among the kept rows.
    """
    pts = [(1.0 / (e * e), math.log(l / r))
           for (e, lam, l, r, _) in rows if l > 0 and r > 0]
    if len(pts) < 2:
        return float("nan"), float("nan")
    X = np.array([u for u, _ in pts])
    Y = np.array([v for _, v in pts])
    if np.ptp(X) == 0:
        return float("nan"), float("nan")
    slope, intercept = np.polyfit(X, Y, 1)
    pred = slope * X + intercept
    ss_res = float(np.sum((Y - pred) ** 2))
    ss_tot = float(np.sum((Y - Y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(-slope), float(r2)


def pooled_good_lambda(reports) -> tuple[float, float, list]:
    """Ensemble regression for the good-lambda comparison.

    Pools the reports' rows per eps (summing lhs and rhs measures over all
    functions and lambdas), then fits log(pooled ratio) = intercept - c/eps^2
    over the pooled rows with positive numerator and denominator.  Per-row
    ratios are far too noisy for a single function; the pooled curve is the
    quantity the exponential-square law describes.  Returns (c, r2, table)
    with table rows (eps, lhs_sum, rhs_sum, ratio).
    """
    num: dict = {}
    den: dict = {}
    for rep in reports:
        for (e, lam, l, r, _) in rep.rows:
            key = round(e, 12)
            num[key] = num.get(key, 0.0) + l
            den[key] = den.get(key, 0.0) + r
    table = []
    for e in sorted(num):
        ratio = num[e] / den[e] if den[e] > 0 else 0.0
        table.append((e, num[e], den[e], ratio))
    pts = [(1.0 / (e * e), math.log(ratio))
           for (e, l, r, ratio) in table if l > 0 and r > 0]
    if len(pts) < 2:
        return float("nan"), float("nan"), table
    X = np.array([u for u, _ in pts])
    Y = np.array([v for _, v in pts])
    if np.ptp(X) == 0:
        return float("nan"), float("nan"), table
    slope, intercept = np.polyfit(X, Y, 1)
    pred = slope * X + intercept
    ss_res = float(np.sum((Y - pred) ** 2))
    ss_tot = float(np.sum((Y - Y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(-slope), float(r2), table


def check_good_lambda(f: SampledFunction, eps_grid=None,
                      lambda_grid=None, quantiles: int = 20) -> GoodLambdaReport:
    """Tabulates the good-lambda comparison for one function.

    eps defaults to 0.1..0.5 in steps of 0.05; lambda defaults to the
    (i+1)/(quantiles+1) quantiles of the positive part of M^d f.  Measures
    are exact cell counts times the cell width.
    """
    if eps_grid is None:
        eps_grid = np.arange(0.1, 0.5001, 0.05)
    eps_grid = [float(e) for e in eps_grid]
    for e in eps_grid:
        if not 0.0 < e < 1.0:
            raise DomainError(f"eps must lie in (0,1), got {e}")
    md = dyadic_maximal(f).values
    sf = haar_square(f).values
    if lambda_grid is None:
        qs = (np.arange(quantiles) + 1.0) / (quantiles + 1.0)
        # zero quantiles (f vanishing on large sets) carry no content; drop
        lams = [float(l) for l in np.quantile(md, qs) if l > 0]
    else:
        lams = [float(l) for l in lambda_grid]
        if any(l <= 0 for l in lams):
            raise DomainError("lambda values must be positive")
    width = f.grid.width
    rows = []
    for e in eps_grid:
        for lam in lams:
            lhs = float(np.count_nonzero((md > lam) & (sf < e * lam))) * width
            rhs = float(np.count_nonzero(md > lam / 2.0)) * width
            ratio = lhs / rhs if rhs > 0 else 0.0
            rows.append((e, lam, lhs, rhs, ratio))
    c, r2 = cww_regression(rows)
    return GoodLambdaReport(rows=rows, level=f.grid.level, fitted_c=c, r2=r2)


# ---------------------------------------------------------------------------
# Calderon-Zygmund kernel bounds for sign modulations


def check_cz_kernel(system: OrthonormalSystem, lam=None, beta=None,
                    delta=None, alpha=None, points: int = SAMPLE_POINTS,
                    seed: int = DEFAULT_SEED) -> dict:
    """Size and smoothness of K_lam(x,t) = sum_k lam_k phi_k(x) phi_k(t).

    'size': |K(x,t)| against 1/|x-t| over off-diagonal sample pairs.
    'smoothness': |K(x,t) - K(x,t')| against |t-t'|**beta / |x-t|**(1+beta)
    over pairs with |x-t| > 2|t-t'|, for 0 < beta < min{alpha, delta}
    (default: half that bound).  lam defaults to seeded random signs.
    """
    d = _delta_of(system, delta)
    al = _alpha_of(system, alpha)
    if beta is None:
        beta = 0.5 * min(al, d)
    if not 0.0 < beta < min(al, d):
        raise DomainError(f"beta must lie in (0, min(alpha, delta)), got {beta}")
    if lam is None:
        rng = np.random.default_rng([seed, 202])
        lam = rng.choice([-1.0, 1.0], size=system.size)
    lam = np.asarray(lam, dtype=np.float64)
    if lam.shape != (system.size,):
        raise ShapeError(f"expected {system.size} multipliers, got {lam.shape}")
    if np.max(np.abs(lam)) > 1.0 + 1e-15:
        raise DomainError("multipliers must satisfy |lam_k| <= 1")

    J = system.grid.level
    C = system.grid.cells
    cells = sample_cells(J, points)
    x = system.grid.midpoints()[cells]
    VX = system.values[:, cells]
    K = (lam[:, None] * VX).T @ VX  # K[i,j] = K(x_i, x_j)

    sep = np.abs(x[:, None] - x[None, :])
    off = sep > 0
    r = np.zeros_like(K)
    r[off] = np.abs(K[off]) * sep[off]
    i, j = np.unravel_index(np.argmax(r), r.shape)
    out = {"size": ConstantEstimate(
        "size", float(r[i, j]),
        {"x": float(x[i]), "t": float(x[j]), "lhs": float(abs(K[i, j])),
         "rhs": float(1.0 / sep[i, j])}, int(off.sum()), J)}

    best, wit, count = 0.0, {}, 0
    step = 1
    while step < C:  # dyadic offsets t' = t + step/C
        shifted = np.minimum(cells + step, C - 1)
        good = shifted > cells  # clipped shifts would duplicate t
        VT = system.values[:, shifted]
        Kp = (lam[:, None] * VX).T @ VT  # K(x_i, t_j + h)
        dt = (shifted - cells) / C
        num = np.abs(K - Kp)
        mask = (sep > 2.0 * dt[None, :]) & good[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            den = dt[None, :] ** beta / sep ** (1.0 + beta)
            rr = np.where(mask, num / den, 0.0)
        count += int(mask.sum())
        i, j = np.unravel_index(np.argmax(rr), rr.shape)
        if rr[i, j] > best:
            best = float(rr[i, j])
            wit = {"x": float(x[i]), "t": float(x[j]),
                   "t_prime": float(x[j] + dt[j]), "lhs": float(num[i, j]),
                   "rhs": float(den[i, j]), "beta": beta}
        step *= 2
    out["smoothness"] = ConstantEstimate("smoothness", best, wit, count, J)
    return out
