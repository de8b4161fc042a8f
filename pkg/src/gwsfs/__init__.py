"""gwsfs: exact branching-population simulation and site-frequency-spectrum limits.

The package simulates a supercritical branching population in which every
individual accumulates neutral mutations, evaluates the theoretical limits
the scaled spectrum converges to, and inverts observed spectra into
extinction-probability and effective-mutation-rate estimates.
"""

from .estimate import (
    DegenerateEstimateError,
    EstimateReport,
    FixedSizeBasis,
    FixedTimeBasis,
    estimate_from_spectrum,
    invert_phi_j,
    phi1,
    phi_j,
)
from .limits import (
    BirthDeathSpec,
    BudgetExceededError,
    LimitOptions,
    LimitValue,
    NotBirthDeathError,
    bd_sfs_limit,
    bd_sfs_limit_quadrature,
    bd_total_mut_limit,
    bd_transition_prob,
    general_sfs_limit,
    general_sfs_limits,
    general_total_mut_limit,
    proportion_limit,
)
from .model import (
    DerivedQuantities,
    InvalidConfigError,
    ModelError,
    ModelParams,
    NoConvergenceError,
    NonPositiveRateError,
    NotNormalizedError,
    OffspringDistribution,
    SubcriticalError,
    derive,
    extinction_probability,
    load_model_config,
    parse_model_config,
    validate_params,
)
from .sfs import (
    AggregateRow,
    EmptySpectrumError,
    MeanNormalizedFixedSize,
    MeanNormalizedFixedTime,
    NoSurvivorsError,
    SiteFrequencySpectrum,
    SpectrumSummary,
    aggregate,
    mean_and_se,
    pool_spectra,
    summarize,
)
from .sim import (
    CloneCounter,
    EmptyPopulationError,
    FixedSize,
    FixedTime,
    NotInstrumentedError,
    PopulationState,
    ReplicateResult,
    SimOptions,
    StopReason,
    replicate_seed,
    run,
    run_batch,
    run_reference,
    snapshot_sfs,
    verify_decomposition,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
