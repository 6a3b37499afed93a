"""High-dimensional max-type tests for extreme value indices."""

__version__ = "0.1.0"

from .errors import DomainError, EVIError, ParameterError, ParseError, SingularityError
from .hill import HillEstimates, KChoice, hill_confidence_interval, hill_estimate, hill_estimates
from .maxtest import (
    NullSpec, TestReport, calibrate, run_max_test, statistic_T, statistic_T_star,
)
from .dependence import (
    approx_omega_from_R, omega_test, statistic_T_omega, tail_dependence_matrix,
    wald_statistic, wald_test, zeta,
)
