"""Win probabilities for weighted binary voting with random vote delegation."""

from .delegation import (
    DelegationScenario,
    OutcomeDistribution,
    adversarial_delegator_weights,
    enumerate_post_delegation,
    equalweight_delegation_probability,
    post_delegation_win_probability,
)
from .errors import CapacityError, UndefinedCorrelationError, ValidationError, VoteDelegationError
from .experiments import (
    ConvergenceSeries,
    StudyConfig,
    StudyRecord,
    SweepConfig,
    claim_gap,
    run_convergence_study,
    run_imbalance_study,
    run_p_limit_study,
    run_theorem_sweep,
)
from .imbalance import ImbalanceMeasures, imbalance_measures, pearson
from .model import (
    DistributionClass,
    DistributionKind,
    WeightVector,
    classify,
    dw_win_probability,
    ew_win_probability,
    outcome_share,
    total_weight,
    win_probability,
    win_probability_dp,
    win_probability_enum,
)
from .montecarlo import Estimate, LargeElectionParams, mc_large_election, mc_win_probability

__version__ = "0.1.0"
