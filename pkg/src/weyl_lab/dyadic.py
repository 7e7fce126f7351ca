"""Dyadic grids on [0,1) and functions sampled on them.

Everything downstream works on a uniform grid of 2**J half-open cells
[i/2**J, (i+1)/2**J).  A sampled function is the vector of its values at
the cell midpoints; integrals are midpoint-rule sums, which are exact for
functions that are constant on cells (indicators, Haar polynomials).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ShapeError

# Hard cap on the refinement level; 2**24 cells is the largest grid the
# exact algorithms are allowed to touch.
MAX_LEVEL = 24


@dataclass(frozen=True)
class DyadicGrid:
    """Uniform dyadic partition of [0,1) into 2**level cells."""

    level: int

    def __post_init__(self):
        if not isinstance(self.level, (int, np.integer)):
            raise DomainError(f"grid level must be an integer, got {self.level!r}")
        if not 0 <= self.level <= MAX_LEVEL:
            raise DomainError(
                f"grid level must be in [0, {MAX_LEVEL}], got {self.level}")

    @property
    def cells(self) -> int:
        return 1 << self.level

    @property
    def width(self) -> float:
        return 2.0 ** -self.level

    def midpoints(self) -> np.ndarray:
        """Cell midpoints (i + 1/2) / 2**level, i = 0..2**level - 1."""
        n = self.cells
        return (np.arange(n, dtype=np.float64) + 0.5) / n

    def edges(self) -> np.ndarray:
        """The 2**level + 1 cell edges i / 2**level."""
        n = self.cells
        return np.arange(n + 1, dtype=np.float64) / n


def make_grid(level: int) -> DyadicGrid:
    """Build the dyadic grid at the given refinement level (0..24)."""
    return DyadicGrid(level)


@dataclass(frozen=True)
class DyadicInterval:
    """The dyadic interval [ (j-1)/2**n, j/2**n ) with 1 <= j <= 2**n."""

    level: int
    index: int

    def __post_init__(self):
        if self.level < 0 or self.level > MAX_LEVEL:
            raise DomainError(f"interval level must be in [0, {MAX_LEVEL}]")
        if not 1 <= self.index <= (1 << self.level):
            raise DomainError(
                f"interval index must be in [1, 2**{self.level}], got {self.index}")

    @property
    def left(self) -> float:
        return (self.index - 1) / (1 << self.level)

    @property
    def right(self) -> float:
        return self.index / (1 << self.level)

    @property
    def width(self) -> float:
        return 2.0 ** -self.level

    def contains(self, x: float) -> bool:
        return self.left <= x < self.right


def dyadic_interval(x: float, n: int) -> DyadicInterval:
    """The level-n dyadic interval containing x in [0,1)."""
    if not 0.0 <= x < 1.0:
        raise DomainError(f"point must lie in [0,1), got {x}")
    j = int(np.floor(x * (1 << n)))  # 0-based cell
    return DyadicInterval(n, j + 1)


@dataclass
class SampledFunction:
    """A function on [0,1) given by its values at the midpoints of a grid.

    ``meta`` carries provenance of derived outputs (e.g. which approximation
    mode a maximal operator ran in); it does not affect equality of values.
    """

    grid: DyadicGrid
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.shape[0] != self.grid.cells:
            raise ShapeError(
                f"expected {self.grid.cells} values on a level-{self.grid.level} "
                f"grid, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise DomainError("sampled values must be finite")
        self.values = v

    @classmethod
    def from_callable(cls, grid: DyadicGrid, fn) -> "SampledFunction":
        """Sample a callable at the cell midpoints."""
        return cls(grid, np.asarray(fn(grid.midpoints()), dtype=np.float64))

    @classmethod
    def indicator(cls, grid: DyadicGrid, a: float, b: float) -> "SampledFunction":
        """Indicator of [a, b), sampled at midpoints."""
        if not (0.0 <= a < b <= 1.0):
            raise DomainError(f"need 0 <= a < b <= 1, got a={a}, b={b}")
        x = grid.midpoints()
        return cls(grid, ((x >= a) & (x < b)).astype(np.float64))


def _check_same_grid(f: SampledFunction, g: SampledFunction):
    if f.grid.level != g.grid.level:
        raise ShapeError(
            f"grid levels differ: {f.grid.level} vs {g.grid.level}")


def integrate(f: SampledFunction) -> float:
    """Midpoint-rule integral over [0,1); exact for cell-constant f."""
    return float(np.mean(f.values))


def inner_product(f: SampledFunction, g: SampledFunction) -> float:
    """Grid inner product <f, g> = mean of the pointwise product."""
    _check_same_grid(f, g)
    return float(np.dot(f.values, g.values) / f.grid.cells)


def lp_norm(f: SampledFunction, p: float) -> float:
    """The L^p(0,1) norm, 1 <= p < inf, by the midpoint rule."""
    if not (p >= 1.0 and np.isfinite(p)):
        raise DomainError(f"p must satisfy 1 <= p < inf, got {p}")
    return float(np.mean(np.abs(f.values) ** p) ** (1.0 / p))


def sup_norm(f: SampledFunction) -> float:
    """Max of |f| over the sample points."""
    return float(np.max(np.abs(f.values)))


def oscillation(f: SampledFunction, interval: DyadicInterval) -> float:
    """sup - inf of the sampled values over cells meeting the interval.

    Works both ways round: for an interval coarser than the grid this scans
    the cells inside it; for one finer than the grid it reduces to the single
    cell containing it.
    """
    cells = f.grid.cells
    i0 = int(np.floor(interval.left * cells))
    i1 = int(np.ceil(interval.right * cells))
    i1 = max(i1, i0 + 1)
    if i0 >= cells:
        raise DomainError("interval lies outside [0,1)")
    chunk = f.values[i0:i1]
    return float(chunk.max() - chunk.min())
