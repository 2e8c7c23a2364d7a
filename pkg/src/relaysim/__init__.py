"""Monte Carlo link simulator for distributed beamforming to a two-antenna destination."""

from relaysim.channel import NetworkRealization, TrialSeed, sample_complex_noise, sample_network
from relaysim.combining import (
    COMBINER,
    apply_combiner,
    effective_orthonormal,
    propagate_and_combine,
    relay_transform,
    stack_rx,
)
from relaysim.linalg import Svd2xN, simo_norm, svd_2xn
from relaysim.montecarlo import (
    ActiveCountCurve,
    OutageCurve,
    SweepSpec,
    analytic_outage_single_relay,
    estimate,
    estimate_by_active_count,
)
from relaysim.protocol import TrialConfig, TrialOutcome, decode_set, mutual_information, run_trial
from relaysim.schemes import PowerConfig, SchemeKind

__version__ = "0.1.0"
