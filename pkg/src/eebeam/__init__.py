"""Energy-efficient beamforming for the two-user multi-antenna downlink.

Forward models, a successive-convex-approximation solver and brute-force
oracles for comparing rate-splitting against spatial multiplexing and
superposition-coding baselines.
"""

from .scenario import (
    Scenario,
    WeightVector,
    dbm_to_watts,
    make_channels,
    scenario_from_config,
    total_power,
    watts_to_dbm,
)
from .schemes import (
    CommonRateSplit,
    DecodingOrder,
    PowerBudgetViolation,
    PrecoderSet,
    RateReport,
    SplitExceedsCommonRate,
    evaluate_ee,
    individual_ee,
    noma_as_rsma,
    noma_rates,
    rsma_rates,
    sdma_as_rsma,
    sdma_rates,
)
from .sca import (
    IterateState,
    ScaOptions,
    SolveResult,
    SubproblemFailure,
    build_subproblem,
    initialize,
    linearize_qol,
    linearize_ratio,
    sca_solve,
    solve_noma,
    solve_scheme,
)
from .oracle import GridSpec, grid_ee_nt1, grid_ee_span
from .region import RegionBoundary, WeightSweep, region_dominates, sweep, sweep_all

__version__ = "0.1.0"
