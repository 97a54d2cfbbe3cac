"""Secrecy performance of MIMO wiretap channels under transmit antenna selection."""
from .analytic import (
    ChannelGainMoments,
    SecrecyRateDistribution,
    SystemConfig,
    channel_gain_moments,
    epsilon_outage_rate,
    ergodic_secrecy_rate,
    outage_probability,
    prob_nonzero_secrecy,
    secrecy_distribution,
)
from .errors import BracketError, ConvergenceError, DomainError
from .montecarlo import Estimate, estimate_metric, sample_channel, simulate_trials, tas_select
from .optimizer import (
    OptimalSelection,
    optimal_L_example1,
    optimal_L_example2,
    optimal_L_example3,
    optimal_L_exhaustive,
)
from .prevalence import (
    PrevalenceReport,
    PrevalenceTuple,
    fixed_point_function,
    receiver_prevailing,
    single_antenna_eavesdropper_threshold,
)

__version__ = "0.1.0"
