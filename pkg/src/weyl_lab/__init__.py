"""weyl-lab: computational laboratory for wavelet-type orthonormal systems.

Concrete systems (Haar, Franklin, file-loaded) on dyadic grids over [0,1),
the operator zoo built on them (maximal functions, square functions, chain
maxima, blockwise majorants), empirical constant-fitting for the supporting
inequalities, and search-based estimation of Weyl-multiplier growth
sequences.
"""

from ._kernels import backend_name
from .dyadic import (DyadicGrid, DyadicInterval, SampledFunction,
                     dyadic_interval, inner_product, integrate, lp_norm,
                     make_grid, oscillation, sup_norm)
from .errors import (DomainError, FormatError, NumericError, ResourceError,
                     ShapeError, WeylLabError)
from .extremal import (EstimateRecord, SearchConfig, brute_force_A,
                       estimate_A, estimate_A_sweep, evaluate_witness,
                       fit_growth, theorem1_pipeline)
from .systems import (ConditionReport, OrthonormalSystem, build_franklin,
                      build_haar, center, load_system, save_system,
                      verify_wavelet_type, xi)

__version__ = "0.1.0"
