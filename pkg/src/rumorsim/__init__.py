"""Mean-field, closed-form and agent-based tools for the 2SIH2R rumor/truth model."""

__version__ = "0.1.0"

from .model import (
    COMPARTMENTS,
    FIG2_PARAMS,
    FIG11_PARAMS,
    DerivVector,
    DiscernibilitySpec,
    ModelParams,
    ParameterError,
    StateError,
    StateVector,
    discernibility,
    rhs,
    validate,
)
from .integrate import (
    IntegrationOptions,
    NotConvergedError,
    NumericalInstabilityError,
    Trajectory,
    final_state,
    integrate,
)
from .analysis import (
    ALWAYS_SPREADS,
    ThresholdReport,
    c_constant,
    epsilon,
    final_size_rumor_only,
    initial_rates,
    spreading_condition,
    threshold_lambda1,
    threshold_lambda2,
    threshold_report,
)
