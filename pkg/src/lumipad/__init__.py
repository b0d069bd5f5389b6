"""lumipad: light-driven tactile guidance of micro-drone landings.

A deterministic simulator of drones descending onto hand-held sensor-tactor
pads, synthetic operator policies for visual / tactile / combined feedback,
trajectory and landing statistics, from-scratch inferential tests, a batch
experiment harness, and an interactive session server.
"""

from .conditions import ConditionSpec
from .harness import (
    AnalysisOptions,
    ExperimentConfig,
    PolicyParamSet,
    default_config,
    derive_trial_seed,
    load_config,
    run_batch,
)
from .kinemetrics import MotionSummary, Trajectory, derivative_series, mean_tracking_distance, motion_summary
from .landing import (
    DisplacementStats,
    LandingRecord,
    RegressionFit,
    containment_diameter,
    group_stats,
    landing_axis_regression,
)
from .photometry import PhotometricParams, SensorPose, illuminance, photocurrent
from .policies import (
    AttentionHeadModel,
    CombinedPolicy,
    CombinedPolicyParams,
    PadObservation,
    StationaryPolicy,
    TactilePolicy,
    TactilePolicyParams,
    VisualPolicy,
    VisualPolicyParams,
)
from .reports import analyze
from .stats import (
    AnovaTable,
    RMDataset,
    TTestResult,
    f_sf,
    paired_t_test,
    reg_inc_beta,
    rm_anova_one_way,
    rm_anova_two_way,
    t_two_tailed_p,
)
from .tactors import (
    ActuatorParams,
    PadGeometry,
    TactileFrame,
    activation_centroid,
    raw_frame,
    step_frame,
)
from .world import (
    DroneState,
    PadState,
    ScenarioSpec,
    TouchdownOutcome,
    TrialLog,
    run_trial,
    spawn_trial,
    step,
)

__version__ = "0.1.0"

__all__ = [
    "ActuatorParams", "AnalysisOptions", "AnovaTable", "AttentionHeadModel",
    "CombinedPolicy", "CombinedPolicyParams", "ConditionSpec",
    "DisplacementStats", "DroneState", "ExperimentConfig", "LandingRecord",
    "MotionSummary", "PadGeometry", "PadObservation", "PadState",
    "PhotometricParams", "PolicyParamSet", "RMDataset", "RegressionFit",
    "ScenarioSpec", "SensorPose", "StationaryPolicy", "TTestResult",
    "TactileFrame", "TactilePolicy", "TactilePolicyParams", "TouchdownOutcome",
    "Trajectory", "TrialLog", "VisualPolicy", "VisualPolicyParams",
    "activation_centroid", "analyze", "containment_diameter", "default_config",
    "derivative_series", "derive_trial_seed", "f_sf", "group_stats",
    "illuminance", "landing_axis_regression", "load_config",
    "mean_tracking_distance", "motion_summary", "paired_t_test", "photocurrent",
    "raw_frame", "reg_inc_beta", "rm_anova_one_way", "rm_anova_two_way",
    "run_batch", "run_trial", "spawn_trial", "step", "step_frame",
    "t_two_tailed_p",
]
