use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{AiParams, Controller, ControllerBinding, Role};
use crate::geometry::{is_simple_polygon, Vec2};
use crate::sim::{AgentId, AgentKind, AgentState, Pose, Shape, SimError, TerminationRules, World};

use super::map::MapSpec;

/// Allowed scene length in seconds.
pub const MIN_TIMEOUT_S: f64 = 10.0;
pub const MAX_TIMEOUT_S: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub id: AgentId,
    pub kind: AgentKind,
    pub shape: Shape,
    pub spawn: Pose,
    /// Initial speed along the spawn heading (m/s).
    #[serde(default)]
    pub speed: f64,
    pub controller: Controller,
    /// Used in place of a live or replay controller when none is attached.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub headless: Option<Controller>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Termination {
    pub timeout_s: f64,
    pub on_goal: bool,
    pub on_collision: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub id: String,
    pub map: MapSpec,
    pub agents: Vec<AgentSpec>,
    #[serde(default)]
    pub goal_region: Vec<Vec2>,
    pub termination: Termination,
    pub seed: u64,
    #[serde(default)]
    pub params: AiParams,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid scenario:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
    #[error("unknown scenario {0:?}")]
    Unknown(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Parse and validate a scenario file.
pub fn load_scenario(text: &str) -> Result<ScenarioSpec, ScenarioError> {
    let spec: ScenarioSpec = serde_json::from_str(text).map_err(|e| ScenarioError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let problems = spec.violations();
    if problems.is_empty() {
        Ok(spec)
    } else {
        Err(ScenarioError::Invalid(problems))
    }
}

impl ScenarioSpec {
    /// Scenario file text; [`load_scenario`] reads it back unchanged.
    pub fn to_text(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("scenario serializes");
        text.push('\n');
        text
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.id.trim().is_empty() {
            out.push("id must not be empty".to_string());
        }
        out.extend(self.map.violations());
        out.extend(self.params.violations());

        let t = &self.termination;
        if !(MIN_TIMEOUT_S..=MAX_TIMEOUT_S).contains(&t.timeout_s) {
            out.push(format!(
                "termination.timeout_s {} outside [{MIN_TIMEOUT_S}, {MAX_TIMEOUT_S}] s",
                t.timeout_s
            ));
        }
        if !self.goal_region.is_empty() && !is_simple_polygon(&self.goal_region) {
            out.push("goal_region is not a simple polygon".to_string());
        }
        if t.on_goal && self.goal_region.is_empty() {
            out.push("termination.on_goal requires a goal_region".to_string());
        }

        let mut first_seen: BTreeMap<AgentId, usize> = BTreeMap::new();
        let limits = &self.params.limits;
        let mut live_peds = 0;
        let mut manual_cars = 0;
        for (i, a) in self.agents.iter().enumerate() {
            let at = format!("agents[{i}] (id {})", a.id);
            if let Some(prev) = first_seen.insert(a.id, i) {
                first_seen.insert(a.id, prev);
                out.push(format!("duplicate agent id {}: agents[{prev}] and agents[{i}]", a.id));
            }
            if !a.shape.is_valid() {
                out.push(format!("{at}: shape must be strictly positive"));
            }
            if !a.spawn.is_finite() || !self.map.bounds.contains(a.spawn.xy()) {
                out.push(format!("{at}: spawn outside map.bounds"));
            }
            let v_max = match a.kind {
                AgentKind::Car => limits.v_max_car,
                AgentKind::Pedestrian => limits.v_max_ped,
            };
            if !(a.speed >= 0.0 && a.speed <= v_max) {
                out.push(format!("{at}: speed {} outside [0, {v_max}]", a.speed));
            }
            for (slot, c) in std::iter::once(("controller", &a.controller)).chain(a.headless.iter().map(|h| ("headless", h))) {
                out.extend(controller_violations(c, a.kind, limits).into_iter().map(|m| format!("{at}.{slot}: {m}")));
            }
            if let Some(h) = &a.headless {
                if matches!(h, Controller::Live { .. } | Controller::ManualVehicle { .. } | Controller::Replay { .. }) {
                    out.push(format!("{at}.headless must be vehicle_ai or scripted"));
                }
            }
            match a.controller {
                Controller::Live { .. } => live_peds += 1,
                Controller::ManualVehicle { .. } => manual_cars += 1,
                _ => {}
            }
        }
        if live_peds > 1 {
            out.push(format!("at most one live pedestrian per scenario, found {live_peds}"));
        }
        if manual_cars > 1 {
            out.push(format!("at most one manual vehicle per scenario, found {manual_cars}"));
        }
        out
    }

    /// Roles a live session has to fill.
    pub fn live_roles(&self) -> Vec<Role> {
        let mut roles: Vec<Role> = self.agents.iter().filter_map(|a| a.controller.live_role()).collect();
        roles.sort();
        roles.dedup();
        roles
    }

    pub fn bindings(&self) -> Vec<ControllerBinding> {
        self.agents
            .iter()
            .map(|a| ControllerBinding {
                agent_id: a.id,
                kind: a.kind,
                controller: a.controller.clone(),
                headless: a.headless.clone(),
            })
            .collect()
    }

    pub fn termination_rules(&self) -> TerminationRules {
        TerminationRules {
            on_goal: self.termination.on_goal,
            on_collision: self.termination.on_collision,
            goal_region: (!self.goal_region.is_empty()).then(|| self.goal_region.clone()),
            ..TerminationRules::timeout_only(self.termination.timeout_s)
        }
    }

    pub fn initial_agents(&self) -> Vec<AgentState> {
        self.agents
            .iter()
            .map(|a| AgentState::spawn(a.id, a.kind, a.shape, a.spawn, a.speed))
            .collect()
    }

    /// Frame-0 world for this scenario.
    pub fn build_world(&self) -> Result<World, ScenarioError> {
        let problems = self.violations();
        if !problems.is_empty() {
            return Err(ScenarioError::Invalid(problems));
        }
        Ok(World::new(
            self.initial_agents(),
            Arc::new(self.map.clone()),
            self.seed,
            self.params.limits,
            self.termination_rules(),
        )?)
    }
}

fn controller_violations(c: &Controller, kind: AgentKind, limits: &crate::sim::DynamicsLimits) -> Vec<String> {
    let mut out = Vec::new();
    if !matches!(c, Controller::Replay { .. }) && c.drives() != kind {
        out.push(format!("{} controller cannot drive a {kind}", c.label()));
    }
    match c {
        Controller::VehicleAi { route } => out.extend(route.violations(limits.v_max_car)),
        Controller::Scripted { script } => out.extend(script.violations(limits.v_max_ped)),
        Controller::Live { role } if *role != Role::Pedestrian => {
            out.push(format!("live controller needs role pedestrian, got {role}"))
        }
        Controller::ManualVehicle { role } if *role != Role::Vehicle => {
            out.push(format!("manual_vehicle controller needs role vehicle, got {role}"))
        }
        _ => {}
    }
    out
}
