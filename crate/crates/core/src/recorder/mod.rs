//! Frame records, scene files, resampling and replay files.

mod kinematics;
mod record;
mod replay_io;
mod scene;

use thiserror::Error;

use crate::sim::AgentId;

pub use kinematics::{derive_kinematics, Kinematics};
pub use record::{capture_frame, frame_time, AgentFrameRecord};
pub use replay_io::{read_replay, write_replay, REPLAY_EXT};
pub use scene::{
    corpus_stats, finalize_scene, read_scene, resample_scene, supported_rate, write_scene, AgentInfo, CorpusStats,
    SceneFile, SceneHeader, MAX_SCENE_S, MIN_SCENE_S, SCENE_EXT, SCENE_FORMAT,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RecorderError {
    #[error("scene is {seconds} s ({frames} frames), below the 10 s minimum")]
    TooShort { frames: u64, seconds: f64 },
    #[error("scene is {seconds} s ({frames} frames), above the 30 s maximum")]
    TooLong { frames: u64, seconds: f64 },
    #[error("missing records (frame, agent): {0:?}")]
    Holes(Vec<(u64, AgentId)>),
    #[error("agent {id} at frame {frame}: yaw {yaw} outside [-180, 180)")]
    YawRange { frame: u64, id: AgentId, yaw: f64 },
    #[error("agent {id} at frame {frame}: non-finite field")]
    NonFinite { frame: u64, id: AgentId },
    #[error("cannot resample {from} Hz to {to} Hz")]
    Resample { from: u32, to: u32 },
    #[error("unsupported rate {0} Hz")]
    UnsupportedRate(u32),
    #[error("unsupported format {0:?}")]
    Format(String),
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("empty file")]
    Empty,
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Kinematics(String),
}
