"""Detection-agnostic box tracking with robust recursive class estimation.

The pipeline: anchor-box detector proposals are clustered per object and
fused into measurements carrying an explicit covariance; a constant-position
Kalman filter tracks each box; a recursive running-average filter tracks
each object's class PMF so that one misclassified frame cannot kill an
established track.
"""

from .class_filter import ClassTrackState, GainPolicy, LostCheck, gain, is_lost, update_class
from .core import (
    BoundingBox,
    ClassPmf,
    ClasstrackError,
    FrameDetections,
    LengthMismatch,
    NegativeEntry,
    NotASimplex,
    NotSymmetric,
    Proposal,
    flat_pmf,
    psd_project,
    validate_pmf,
)
from .evaluate import (
    ExperimentReport,
    NoTruth,
    SequenceResult,
    difficulty_sweep,
    emit_plot_data,
    rmse_px,
    run_experiment,
    run_tracker,
)
from .fusion import (
    AllZeroWeights,
    FusedMeasurement,
    FusionConfig,
    cluster_proposals,
    fuse,
    fusion_weights,
    iou,
    max_object_conf,
    measurements_from_frame,
    nms_baseline,
    top_class,
)
from .kalman import BoxState, MotionModel, SingularInnovation, default_process_noise
from .kalman import predict as kf_predict
from .kalman import update as kf_update
from .sim import Corruption, GroundTruth, InvalidConfig, ScenarioConfig, generate, make_corruption_suite
from .tracker import (
    FrameReport,
    NonMonotonicFrameIndex,
    Track,
    Tracker,
    TrackerConfig,
    TrackSnapshot,
    TrackStatus,
    associate,
)

__version__ = "0.1.0"

__all__ = [
    "BoundingBox",
    "ClassPmf",
    "Proposal",
    "FrameDetections",
    "validate_pmf",
    "flat_pmf",
    "psd_project",
    "ClasstrackError",
    "NotASimplex",
    "NegativeEntry",
    "LengthMismatch",
    "NotSymmetric",
    "FusionConfig",
    "FusedMeasurement",
    "iou",
    "top_class",
    "max_object_conf",
    "cluster_proposals",
    "fusion_weights",
    "fuse",
    "measurements_from_frame",
    "nms_baseline",
    "AllZeroWeights",
    "BoxState",
    "MotionModel",
    "default_process_noise",
    "kf_predict",
    "kf_update",
    "SingularInnovation",
    "GainPolicy",
    "ClassTrackState",
    "LostCheck",
    "gain",
    "update_class",
    "is_lost",
    "Track",
    "Tracker",
    "TrackerConfig",
    "TrackSnapshot",
    "TrackStatus",
    "FrameReport",
    "associate",
    "NonMonotonicFrameIndex",
    "ScenarioConfig",
    "Corruption",
    "GroundTruth",
    "generate",
    "make_corruption_suite",
    "InvalidConfig",
    "SequenceResult",
    "ExperimentReport",
    "run_tracker",
    "run_experiment",
    "difficulty_sweep",
    "rmse_px",
    "emit_plot_data",
    "NoTruth",
    "__version__",
]
