"""Weighted best approximations, diagonal flows on unimodular lattices, and
their limit-law statistics at desk scale."""

__version__ = "0.1.0"

from .errors import (
    AmbiguityBudgetExceeded,
    BoundaryAmbiguous,
    ConfigError,
    EnumerationBudgetExceeded,
    InsufficientHorizon,
    PrecisionExhausted,
    UncertifiableComparison,
    WbaError,
)
from .dyadic import DEFAULT_MAX_BITS, DEFAULT_START_BITS, DyadicInterval, bits_ceiling
from .quasinorm import (
    RadicalValue,
    WeightVector,
    WVector,
    quasi_norm,
    quasi_norm_compare,
    scale_w,
    wnorm,
)
from .bestapprox import (
    BestApproxRecord,
    BestApproxSequence,
    ThetaVector,
    enumerate_best_approx_bruteforce,
    enumerate_best_approx_fast,
    enumerate_regular_best_approx,
    nearest_p,
    prefix_equivalent,
)
from .lattice import (
    FlowParams,
    Region,
    UnimodularLattice,
    apply_flow,
    classify_section_point,
    delta_fn,
    enumerate_in_region,
    lambda1_sup,
    lambda1_w,
    make_theta_lattice,
)
