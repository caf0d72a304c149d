"""Leader Green Election: survivor-count analytics, slot-level simulation,
Monte Carlo validation and the urns-and-balls lower bound."""

from .analytics import (
    CancellationError,
    GeoParam,
    RiceApprox,
    SurvivorPmf,
    expected_max_approx,
    expected_max_exact,
    expected_survivors,
    harmonic,
    max_geo_tail_bound,
    phi_bound,
    pmf_rice_approx,
    rounds_required,
    sample_geometric,
    survivor_pmf,
    survivor_pmf_alternating,
    survivor_pmf_series,
    survivor_tail_bound,
)
from .protocol import encode_key, lge_phase, run_election, survivors_oracle, truncate_draw
from .occupancy import (
    MspResult,
    SimplexVector,
    msp_bound,
    msp_search,
    random_bits_threshold,
    singleton_prob_exact,
    singleton_prob_single_urn,
    willard_f,
)

__version__ = "0.1.0"
