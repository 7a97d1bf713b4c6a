//! Deterministic fixed-timestep world: agent state, kinematic integration,
//! footprint collision and termination.

mod collision;
mod command;
mod dynamics;
mod types;
mod world;

use thiserror::Error;

pub use collision::obb_overlap;
pub(crate) use collision::footprints_overlap;
pub use command::{Command, DriveCommand, WalkCommand};
pub use dynamics::{clamp_speed, integrate_pedestrian, integrate_vehicle};
pub use types::{AgentId, AgentKind, AgentState, DynamicsLimits, Pose, Shape};
pub use world::{first_overlap, TerminationReason, TerminationRules, World, WorldSnapshot};

/// Simulation and recording rate.
pub const RATE_HZ: u32 = 20;
/// Fixed timestep in seconds.
pub const DT: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("world already terminated at frame {frame}")]
    Terminated { frame: u64 },
    #[error("command targets unknown agent {0}")]
    UnknownAgent(AgentId),
    #[error("agent {id} is a {found}, expected {expected}")]
    KindMismatch {
        id: AgentId,
        expected: AgentKind,
        found: AgentKind,
    },
    #[error("command kind does not match agent {id} ({kind})")]
    CommandMismatch { id: AgentId, kind: AgentKind },
    #[error("non-finite command for agent {id}")]
    NonFiniteCommand { id: AgentId },
    #[error("duplicate agent id {0}")]
    DuplicateAgent(AgentId),
    #[error("agent {0} has a non-finite pose or invalid shape")]
    InvalidAgent(AgentId),
}
