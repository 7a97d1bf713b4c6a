//! Wire messages. Every message is a JSON object with a `type` field.

use std::path::PathBuf;

use pedsim_core::agents::{InputMessage, Role};
use pedsim_core::sim::{AgentId, AgentKind, WorldSnapshot};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionState {
    Lobby,
    Running,
    Finished,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FinishReason {
    Goal,
    Timeout,
    Collision,
    OperatorStop,
    Disconnect,
}

impl FinishReason {
    pub fn from_termination(r: pedsim_core::sim::TerminationReason) -> Self {
        use pedsim_core::sim::TerminationReason as T;
        match r {
            T::Goal { .. } => FinishReason::Goal,
            T::Timeout => FinishReason::Timeout,
            T::Collision { .. } => FinishReason::Collision,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentView {
    pub id: AgentId,
    pub kind: AgentKind,
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
    pub vx: f64,
    pub vy: f64,
    /// Footprint `[length, width]`.
    pub shape: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateMessage {
    pub frame: u64,
    pub sim_time: f64,
    pub agents: Vec<AgentView>,
    pub state: SessionState,
}

impl StateMessage {
    pub fn from_snapshot(snap: &WorldSnapshot, state: SessionState) -> Self {
        let mut agents: Vec<AgentView> = snap
            .agents
            .iter()
            .map(|a| AgentView {
                id: a.id,
                kind: a.kind,
                x: a.pose.position[0],
                y: a.pose.position[1],
                yaw: a.yaw(),
                vx: a.velocity[0],
                vy: a.velocity[1],
                shape: [a.shape.length, a.shape.width],
            })
            .collect();
        agents.sort_by_key(|a| a.id);
        Self {
            frame: snap.frame,
            sim_time: snap.sim_time,
            agents,
            state,
        }
    }
}

/// Files left by a finished session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinishRecord {
    pub reason: FinishReason,
    pub frames: u64,
    /// `None` when the recording was rejected; see `scene_error`.
    pub scene: Option<PathBuf>,
    pub scene_error: Option<String>,
    pub replay: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Lobby {
        scenario: String,
        seed: u64,
        roles: Vec<Role>,
        connected: Vec<Role>,
    },
    Start {
        frame: u64,
    },
    Finish(FinishRecord),
    Error {
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    State(StateMessage),
    Event(Event),
}

impl ServerMessage {
    pub fn to_text(&self) -> String {
        serde_json::to_string(self).expect("server message serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    Input(InputMessage),
}

/// Parse one client text frame.
pub fn parse_client(text: &str) -> Result<ClientMessage, String> {
    serde_json::from_str(text).map_err(|e| e.to_string())
}
