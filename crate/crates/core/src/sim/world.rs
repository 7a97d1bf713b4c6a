use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::geometry::{point_in_polygon, Vec2};
use crate::scenarios::MapSpec;

use super::collision::obb_overlap;
use super::command::{Command, DriveCommand, WalkCommand};
use super::dynamics::{integrate_pedestrian, integrate_vehicle};
use super::types::{AgentId, AgentKind, AgentState, DynamicsLimits};
use super::{SimError, DT, RATE_HZ};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerminationRules {
    /// The episode ends once this many frames (including frame 0) exist.
    pub timeout_frames: u64,
    pub on_goal: bool,
    pub on_collision: bool,
    pub goal_region: Option<Vec<Vec2>>,
}

impl TerminationRules {
    pub fn timeout_only(timeout_s: f64) -> Self {
        Self {
            timeout_frames: (timeout_s * RATE_HZ as f64).round() as u64,
            on_goal: false,
            on_collision: false,
            goal_region: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum TerminationReason {
    Timeout,
    Goal { agent: AgentId },
    Collision { a: AgentId, b: AgentId },
}

impl TerminationReason {
    pub fn label(&self) -> &'static str {
        match self {
            TerminationReason::Timeout => "timeout",
            TerminationReason::Goal { .. } => "goal",
            TerminationReason::Collision { .. } => "collision",
        }
    }
}

/// Immutable per-frame copy of the world state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldSnapshot {
    pub frame: u64,
    pub sim_time: f64,
    pub agents: Vec<AgentState>,
}

impl WorldSnapshot {
    pub fn agent(&self, id: AgentId) -> Option<&AgentState> {
        self.agents
            .binary_search_by_key(&id, |a| a.id)
            .ok()
            .map(|i| &self.agents[i])
    }
}

/// Fixed-timestep (20 Hz) world. Only [`World::step`] mutates agent state.
#[derive(Debug, Clone)]
pub struct World {
    frame: u64,
    agents: Vec<AgentState>,
    map: Arc<MapSpec>,
    seed: u64,
    limits: DynamicsLimits,
    rules: TerminationRules,
    terminated: Option<TerminationReason>,
    mutations: u64,
}

impl World {
    pub fn new(
        mut agents: Vec<AgentState>,
        map: Arc<MapSpec>,
        seed: u64,
        limits: DynamicsLimits,
        rules: TerminationRules,
    ) -> Result<Self, SimError> {
        agents.sort_by_key(|a| a.id);
        for pair in agents.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(SimError::DuplicateAgent(pair[0].id));
            }
        }
        for a in &agents {
            if !a.pose.is_finite() || !a.shape.is_valid() {
                return Err(SimError::InvalidAgent(a.id));
            }
        }
        Ok(Self {
            frame: 0,
            agents,
            map,
            seed,
            limits,
            rules,
            terminated: None,
            mutations: 0,
        })
    }

    pub fn frame(&self) -> u64 {
        self.frame
    }

    /// Always derived from the frame counter.
    pub fn sim_time(&self) -> f64 {
        self.frame as f64 * DT
    }

    pub fn dt(&self) -> f64 {
        DT
    }

    pub fn agents(&self) -> &[AgentState] {
        &self.agents
    }

    pub fn agent(&self, id: AgentId) -> Option<&AgentState> {
        self.agents
            .binary_search_by_key(&id, |a| a.id)
            .ok()
            .map(|i| &self.agents[i])
    }

    pub fn map(&self) -> &Arc<MapSpec> {
        &self.map
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn limits(&self) -> &DynamicsLimits {
        &self.limits
    }

    pub fn rules(&self) -> &TerminationRules {
        &self.rules
    }

    pub fn terminated(&self) -> Option<TerminationReason> {
        self.terminated
    }

    pub fn is_terminated(&self) -> bool {
        self.terminated.is_some()
    }

    /// Number of state mutations performed so far (one per step).
    pub fn mutation_count(&self) -> u64 {
        self.mutations
    }

    pub fn snapshot(&self) -> WorldSnapshot {
        WorldSnapshot {
            frame: self.frame,
            sim_time: self.sim_time(),
            agents: self.agents.clone(),
        }
    }

    /// Advance one frame. Agents without a command coast (cars) or halt
    /// (pedestrians). Termination is evaluated on the post-step state.
    pub fn step(&mut self, commands: &BTreeMap<AgentId, Command>) -> Result<WorldSnapshot, SimError> {
        if self.terminated.is_some() {
            return Err(SimError::Terminated { frame: self.frame });
        }
        if let Some(&id) = commands.keys().find(|id| self.agent(**id).is_none()) {
            return Err(SimError::UnknownAgent(id));
        }

        let mut next = Vec::with_capacity(self.agents.len());
        for agent in &self.agents {
            let cmd = commands.get(&agent.id).copied();
            let integrated = match (agent.kind, cmd) {
                (AgentKind::Car, Some(Command::Drive(c))) => integrate_vehicle(agent, c, DT, &self.limits)?,
                (AgentKind::Car, None) => integrate_vehicle(agent, DriveCommand::COAST, DT, &self.limits)?,
                (AgentKind::Pedestrian, Some(Command::Walk(c))) => {
                    integrate_pedestrian(agent, c, DT, &self.limits)?
                }
                (AgentKind::Pedestrian, None) => {
                    integrate_pedestrian(agent, WalkCommand::halt(agent.yaw()), DT, &self.limits)?
                }
                (kind, Some(_)) => return Err(SimError::CommandMismatch { id: agent.id, kind }),
            };
            next.push(integrated);
        }

        self.agents = next;
        self.frame += 1;
        self.mutations += 1;
        self.terminated = self.evaluate_termination();
        Ok(self.snapshot())
    }

    fn evaluate_termination(&self) -> Option<TerminationReason> {
        if self.rules.on_collision {
            if let Some((a, b)) = first_overlap(&self.agents) {
                return Some(TerminationReason::Collision { a, b });
            }
        }
        if self.rules.on_goal {
            if let Some(goal) = &self.rules.goal_region {
                if let Some(p) = self
                    .agents
                    .iter()
                    .find(|a| a.kind == AgentKind::Pedestrian && point_in_polygon(a.xy(), goal))
                {
                    return Some(TerminationReason::Goal { agent: p.id });
                }
            }
        }
        if self.frame + 1 >= self.rules.timeout_frames {
            return Some(TerminationReason::Timeout);
        }
        None
    }
}

/// First overlapping pair in id order, if any.
pub fn first_overlap(agents: &[AgentState]) -> Option<(AgentId, AgentId)> {
    for (i, a) in agents.iter().enumerate() {
        for b in &agents[i + 1..] {
            if obb_overlap(&a.pose, &a.shape, &b.pose, &b.shape) {
                return Some((a.id, b.id));
            }
        }
    }
    None
}
