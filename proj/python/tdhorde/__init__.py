"""Online many-prediction TD(lambda) with adaptive per-feature step sizes.

Python surface over the C++ core: selective Kanerva coding, classic TD and
adaptive-step-size learners, hordes of predictors, synthetic sensor streams
with failure injection, and the evaluation harness.
"""

from ._core import (
    ChannelGroup,
    ChannelMeta,
    CoderConfig,
    ConfigError,
    CumulantSource,
    DataError,
    DivergenceError,
    FailureKind,
    FailureSpec,
    FeatureVector,
    GvfSpec,
    Horde,
    HordeStepResult,
    InvariantError,
    KanervaCoder,
    LearnerKind,
    PeriodStats,
    Phase,
    PhaseKind,
    ReturnSeries,
    RmseSeries,
    SensitivityCurve,
    StepSizeSnapshot,
    StreamFrame,
    SweepCell,
    SweepPlan,
    SweepRow,
    SynthProfile,
    TdConfig,
    TdLearner,
    TidbdConfig,
    TidbdLearner,
    TidbdStepInfo,
    TimingReport,
    TrialResult,
    aggregate_periods,
    compute_returns,
    cumulant_series,
    default_channel_meta,
    default_drift_channel,
    default_elbow_channels,
    default_synth_profile,
    encode_stream,
    enumerate_cells,
    inject_failure,
    load_meta_csv,
    load_stream_csv,
    load_sweep_csv,
    normalize,
    phase_boundaries,
    return_horizon_cut,
    rmse_step,
    run_sweep,
    run_trial,
    sensitivity_theta_grid,
    stepsize_sensitivity,
    sweep_row_key,
    synthesize,
    table_plan_td,
    table_plan_tidbd,
    table_step_multipliers,
    validate_meta,
    write_meta_csv,
    write_stream_csv,
)

__all__ = [
    "ChannelGroup",
    "ChannelMeta",
    "CoderConfig",
    "ConfigError",
    "CumulantSource",
    "DataError",
    "DivergenceError",
    "FailureKind",
    "FailureSpec",
    "FeatureVector",
    "GvfSpec",
    "Horde",
    "HordeStepResult",
    "InvariantError",
    "KanervaCoder",
    "LearnerKind",
    "PeriodStats",
    "Phase",
    "PhaseKind",
    "ReturnSeries",
    "RmseSeries",
    "SensitivityCurve",
    "StepSizeSnapshot",
    "StreamFrame",
    "SweepCell",
    "SweepPlan",
    "SweepRow",
    "SynthProfile",
    "TdConfig",
    "TdLearner",
    "TidbdConfig",
    "TidbdLearner",
    "TidbdStepInfo",
    "TimingReport",
    "TrialResult",
    "aggregate_periods",
    "compute_returns",
    "cumulant_series",
    "default_channel_meta",
    "default_drift_channel",
    "default_elbow_channels",
    "default_synth_profile",
    "encode_stream",
    "enumerate_cells",
    "inject_failure",
    "load_meta_csv",
    "load_stream_csv",
    "load_sweep_csv",
    "normalize",
    "phase_boundaries",
    "return_horizon_cut",
    "rmse_step",
    "run_sweep",
    "run_trial",
    "sensitivity_theta_grid",
    "stepsize_sensitivity",
    "sweep_row_key",
    "synthesize",
    "table_plan_td",
    "table_plan_tidbd",
    "table_step_multipliers",
    "validate_meta",
    "write_meta_csv",
    "write_stream_csv",
]
