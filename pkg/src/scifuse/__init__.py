"""Split Covariance Intersection fusion of a single inter-agent range measurement.

Agent A refines its estimate with agent B's estimate and a measured
distance, without knowing how the two estimation errors are correlated.
"""
__version__ = "0.1.0"

from .errors import (
    DegenerateDecomposition,
    DegenerateGeometry,
    DegenerateInformation,
    NotPSDError,
    SciFuseError,
    ScenarioError,
)
from .fusion import (
    DirectionalStats,
    DistanceMeasurement,
    Estimate,
    FilterGain,
    JointCorrelation,
    apply_linear_filter,
    clairvoyant_fusion,
    directional_stats,
    linearize_direction,
    mse_under_correlation,
    sci_covariance,
    sci_gain,
)
from .omega import SciSolution, optimal_sci_filter
from .oracle import ConsistencyReport, SeededRng, check_consistency
from .pertinence import DET, TRACE, CostObjective, CostParams
from .scenario import Scenario, load_scenario, run_fusion
