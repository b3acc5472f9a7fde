"""Frequency-split caching of cumulative transformer features.

The package caches the one tensor a residual denoiser already computes (its
input plus every residual contribution), splits it into frequency bands,
reuses the slowly moving low band across sampling steps, and forecasts the
high band with a short Hermite polynomial fit.  A deterministic toy
denoiser, baselines, a policy sweep, and band-dynamics analysis are
included, all driven by the ``freqca`` command.
"""

from .analyze import FrequencyDynamicsReport, frequency_dynamics
from .cache import (
    CostLedger,
    CrfCache,
    SchedulerPlan,
    StepKind,
    build_plan,
    cost_ledger,
    layerwise_predict_macs,
    polynomial_predict_macs,
    reconstruct_macs,
    split_macs,
)
from .config import (
    GridConfig,
    RunConfig,
    SamplerConfig,
    SweepGrid,
    load_grid_config,
    load_run_config,
)
from .engine import (
    PolicyConfig,
    RunReport,
    RunSummary,
    StepRecord,
    ToyDitHost,
    TrajectoryHost,
    baseline_policy,
    run_full,
    run_layerwise_baseline,
    run_policy,
)
from .errors import (
    BackwardPredictionError,
    ConfigError,
    DegenerateCovarianceError,
    EmptyCacheError,
    FormatError,
    FreqcaError,
    InsufficientHistoryError,
    InvalidCutoffError,
    InvalidIntervalError,
    NonMonotoneStepError,
    OrderTooHighError,
    RankDeficientError,
    ShapeMismatchError,
    ZeroVectorError,
)
from .frequency import (
    BandSplit,
    TransformKind,
    dct2,
    dct2_matrix,
    dct3,
    low_band_count,
    recombine,
    split_bands,
)
from .kernels import active_backend
from .numerics import cosine_similarity, pca_project, solve_least_squares
from .predictor import MAX_ORDER, HermiteFit, fit_hermite, hermite_basis, predict
from .sweep import run_sweep
from .toydit import (
    ForwardTrace,
    SampleResult,
    ToyDit,
    ToyDitConfig,
    config_hash,
    dump_trajectory,
    forward_full,
    init_model,
    load_trajectory,
    model_forward_macs,
    sample,
    timestep_embedding,
)

__version__ = "0.1.0"
