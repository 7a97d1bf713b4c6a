//! Forecast scoring: displacement errors, collision rate, the interaction
//! filter and a constant-velocity baseline.

mod baseline;
mod collision;
mod displacement;
mod evaluate;
mod filter;
mod predictions;

use thiserror::Error;

use crate::sim::AgentId;

pub use baseline::{constant_velocity_baseline, CV_SPREAD_DEG};
pub use collision::{collision_indicators, collision_rate, predicted_headings};
pub use displacement::{ade, fde, min_joint, min_marginal, JointResult, MarginalResult};
pub use evaluate::{
    agent_seed, aggregate, at_rate, baseline_predictions, eval_window, evaluate_corpus, evaluate_scene,
    ground_truth_predictions, scene_id, CrMode, EvalConfig, EvalWindow, Evaluation, MetricsReport, SceneMetrics,
    SceneOutcome, DEFAULT_HISTORY_STEPS, DEFAULT_HORIZON_STEPS, EVAL_RATE_HZ,
};
pub use filter::{filter_interactive, is_interactive, DEFAULT_FILTER_DIST, DEFAULT_FILTER_MIN_SPEED};
pub use predictions::{read_predictions, write_predictions, PredictionHeader, PredictionSet, DEFAULT_K, PRED_EXT};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("trajectory lengths differ or are empty: {pred} vs {gt}")]
    Length { pred: usize, gt: usize },
    #[error("{preds} predicted agents vs {gts} ground-truth agents")]
    Agents { preds: usize, gts: usize },
    #[error("no samples")]
    NoSamples,
    #[error("agents have different sample counts")]
    RaggedK,
    #[error("missing shape for an agent")]
    MissingShape,
    #[error("empty history")]
    EmptyHistory,
    #[error("window needs {need} frames, scene has {have}")]
    Window { need: usize, have: usize },
    #[error("prediction rate {pred} Hz cannot be matched from {gt} Hz ground truth")]
    Rate { pred: u32, gt: u32 },
    #[error("scene {scene}: predicted agent {id} not in ground truth")]
    UnknownAgent { scene: String, id: AgentId },
    #[error("no ground-truth scene {0}")]
    UnknownScene(String),
    #[error("scene {0} predicted twice")]
    DuplicateScene(String),
    #[error("no scene evaluated ({skipped} skipped)")]
    NothingEvaluated { skipped: usize },
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("empty file")]
    EmptyFile,
    #[error("{0}")]
    InvalidPrediction(String),
}
