"""Sharp bounds on the relative treatment effect for ordinal outcomes."""

__version__ = "0.1.0"

from .attainment import (
    build_plan,
    construct_attaining_matrix,
    construct_lower_attaining_matrix,
    triangular_fill_a,
    triangular_fill_b,
    validate_attainment,
)
from .bootstrap import IntervalReport, bootstrap_interval
from .bounds import (
    BoundsReport,
    JointMatrix,
    MarginalDistribution,
    TupleIndex,
    delta_jm,
    distributional_effect,
    gamma_independent,
    gamma_lower,
    gamma_of_joint,
    gamma_upper,
    sharp_bounds,
    tau_eta_gamma,
    validate_marginal,
    xi_jm,
)
from .estimators import Dataset, EstimatorConfig, UnitRecord, estimate_bounds
from .transport import TransportProblem, lp_gamma_bounds, solve_transport
