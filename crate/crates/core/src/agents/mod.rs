//! Controllers that produce per-frame commands for the agents of a world.

mod controller;
mod input;
mod replay;
mod route;
mod vehicle_ai;
mod walker;

use thiserror::Error;

use crate::sim::AgentId;

pub use crate::sim::{Command, DriveCommand, WalkCommand};
pub use controller::{ControlMode, Controller, ControllerBinding, ControllerSet, LiveInputs};
pub use input::{live_walk_command, manual_vehicle_command, InputError, InputMessage, InputPayload, Role};
pub use replay::{replay_command, ReplayEntry, ReplayHeader, ReplayLog};
pub use route::{Route, RouteProjection, RouteStop};
pub use vehicle_ai::{in_detection_corridor, vehicle_ai_command, AiMemory, AiParams};
pub use walker::{gap_clear, scripted_walker_command, ScriptProgress, WalkSegment, WalkerScript};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AgentError {
    #[error("replay frame {0} is negative")]
    NegativeFrame(i64),
    #[error("replay entry for frame {frame} follows frame {previous}")]
    ReplayOrder { frame: u64, previous: u64 },
    #[error("duplicate replay entry for agent {id} at frame {frame}")]
    ReplayDuplicate { frame: u64, id: AgentId },
    #[error("replay log references agent {0}, which is not in the scenario")]
    ReplayUnknownAgent(AgentId),
    #[error("agent {id}: {reason}")]
    Binding { id: AgentId, reason: String },
    #[error("agent {0} missing from snapshot")]
    MissingAgent(AgentId),
}
