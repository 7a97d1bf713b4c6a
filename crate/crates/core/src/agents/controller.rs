use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::sim::{AgentId, AgentKind, Command, DriveCommand, WalkCommand, WorldSnapshot};

use super::input::{live_walk_command, manual_vehicle_command, InputPayload, Role};
use super::replay::{replay_command, ReplayEntry, ReplayLog};
use super::route::Route;
use super::vehicle_ai::{vehicle_ai_command, AiMemory, AiParams};
use super::walker::{scripted_walker_command, ScriptProgress, WalkerScript};
use super::AgentError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Controller {
    VehicleAi { route: Route },
    Scripted { script: WalkerScript },
    Live { role: Role },
    Replay { stream: String },
    ManualVehicle { role: Role },
}

impl Controller {
    pub fn label(&self) -> &'static str {
        match self {
            Controller::VehicleAi { .. } => "vehicle_ai",
            Controller::Scripted { .. } => "scripted",
            Controller::Live { .. } => "live",
            Controller::Replay { .. } => "replay",
            Controller::ManualVehicle { .. } => "manual_vehicle",
        }
    }

    /// The agent kind this controller can drive.
    pub fn drives(&self) -> AgentKind {
        match self {
            Controller::VehicleAi { .. } | Controller::ManualVehicle { .. } => AgentKind::Car,
            Controller::Scripted { .. } | Controller::Live { .. } => AgentKind::Pedestrian,
            // replayed streams carry either kind
            Controller::Replay { .. } => AgentKind::Pedestrian,
        }
    }

    /// The human role that has to be connected for this controller to act.
    pub fn live_role(&self) -> Option<Role> {
        match self {
            Controller::Live { role } | Controller::ManualVehicle { role } => Some(*role),
            _ => None,
        }
    }
}

/// One agent's controller assignment. `headless` stands in for live and
/// replay controllers when no human or stream is attached.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerBinding {
    pub agent_id: AgentId,
    pub kind: AgentKind,
    pub controller: Controller,
    pub headless: Option<Controller>,
}

#[derive(Debug, Clone)]
pub enum ControlMode {
    /// No humans: live and manual slots use their headless fallback.
    Headless,
    /// Live and manual slots read [`LiveInputs`].
    Live,
    /// Every agent not driven by the vehicle policy replays `log`.
    Replay(Arc<ReplayLog>),
}

/// The input consumed for the current frame, at most one per role.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LiveInputs {
    pub latest: BTreeMap<Role, InputPayload>,
}

impl LiveInputs {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn with(role: Role, payload: InputPayload) -> Self {
        let mut latest = BTreeMap::new();
        latest.insert(role, payload);
        Self { latest }
    }
}

#[derive(Debug, Clone)]
enum Active {
    Ai { route: Route, memory: AiMemory },
    Script { script: WalkerScript, progress: ScriptProgress },
    Live(Role),
    Manual(Role),
    Replay,
    Idle,
}

#[derive(Debug, Clone)]
struct Slot {
    id: AgentId,
    kind: AgentKind,
    recorded: bool,
    active: Active,
}

/// Per-agent controllers for one episode. Produces the command map for each
/// frame and logs the commands of every agent not driven by the vehicle
/// policy, so the episode can be re-simulated from the log.
#[derive(Debug, Clone)]
pub struct ControllerSet {
    slots: Vec<Slot>,
    params: AiParams,
    replay: Option<Arc<ReplayLog>>,
    log: ReplayLog,
    input_errors: u64,
}

impl ControllerSet {
    pub fn new(
        bindings: &[ControllerBinding],
        params: AiParams,
        mode: ControlMode,
        scenario: &str,
        seed: u64,
    ) -> Result<Self, AgentError> {
        let replay = match &mode {
            ControlMode::Replay(log) => Some(log.clone()),
            _ => None,
        };
        let mut slots = Vec::with_capacity(bindings.len());
        for b in bindings {
            let recorded = !matches!(b.controller, Controller::VehicleAi { .. });
            let effective = match (&mode, &b.controller) {
                (ControlMode::Replay(_), _) if recorded => None,
                (ControlMode::Headless, Controller::Live { .. } | Controller::ManualVehicle { .. })
                | (_, Controller::Replay { .. }) => b.headless.as_ref(),
                (_, c) => Some(c),
            };
            let active = match effective {
                Some(c) => activate(b, c, &params)?,
                None if replay.is_some() && recorded => Active::Replay,
                None => Active::Idle,
            };
            slots.push(Slot {
                id: b.agent_id,
                kind: b.kind,
                recorded,
                active,
            });
        }
        slots.sort_by_key(|s| s.id);
        if let Some(log) = &replay {
            for id in log.agent_ids() {
                if slots.binary_search_by_key(&id, |s| s.id).is_err() {
                    return Err(AgentError::ReplayUnknownAgent(id));
                }
            }
        }
        Ok(Self {
            slots,
            params,
            replay,
            log: ReplayLog::new(scenario, seed),
            input_errors: 0,
        })
    }

    /// Roles whose inputs this set reads.
    pub fn live_roles(&self) -> Vec<Role> {
        let mut roles: Vec<Role> = self
            .slots
            .iter()
            .filter_map(|s| match s.active {
                Active::Live(r) | Active::Manual(r) => Some(r),
                _ => None,
            })
            .collect();
        roles.sort();
        roles.dedup();
        roles
    }

    /// Commands for the frame captured in `snapshot`.
    pub fn commands(
        &mut self,
        snapshot: &WorldSnapshot,
        inputs: &LiveInputs,
    ) -> Result<BTreeMap<AgentId, Command>, AgentError> {
        let t = snapshot.sim_time;
        let frame = snapshot.frame;
        let mut out = BTreeMap::new();
        for slot in &mut self.slots {
            let state = snapshot.agent(slot.id).ok_or(AgentError::MissingAgent(slot.id))?;
            let cmd = match &mut slot.active {
                Active::Ai { route, memory } => Command::Drive(vehicle_ai_command(
                    state,
                    route,
                    memory,
                    &snapshot.agents,
                    &self.params,
                    t,
                )),
                Active::Script { script, progress } => {
                    Command::Walk(scripted_walker_command(script, progress, state, &snapshot.agents, t))
                }
                Active::Live(role) => match inputs.latest.get(role) {
                    Some(payload) => match live_walk_command(payload, &state.pose, &self.params.limits) {
                        Ok(cmd) => Command::Walk(cmd),
                        Err(_) => {
                            self.input_errors += 1;
                            Command::Walk(WalkCommand::halt(state.yaw()))
                        }
                    },
                    None => Command::Walk(WalkCommand::halt(state.yaw())),
                },
                Active::Manual(role) => Command::Drive(
                    inputs
                        .latest
                        .get(role)
                        .map_or(DriveCommand::COAST, |p| manual_vehicle_command(p, &self.params.limits)),
                ),
                Active::Replay => {
                    let log = self.replay.as_ref().expect("replay slot without a log");
                    replay_command(log, slot.id, slot.kind, frame as i64, state.yaw())?
                }
                Active::Idle => match slot.kind {
                    AgentKind::Car => Command::Drive(DriveCommand::COAST),
                    AgentKind::Pedestrian => Command::Walk(WalkCommand::halt(state.yaw())),
                },
            };
            if slot.recorded {
                self.log.push(ReplayEntry { frame, id: slot.id, cmd })?;
            }
            out.insert(slot.id, cmd);
        }
        Ok(out)
    }

    /// Commands logged so far.
    pub fn replay_log(&self) -> &ReplayLog {
        &self.log
    }

    pub fn into_replay_log(self) -> ReplayLog {
        self.log
    }

    /// Malformed live inputs that were replaced by a halt.
    pub fn input_errors(&self) -> u64 {
        self.input_errors
    }

    /// True when every scripted walker has run out of segments.
    pub fn scripts_done(&self) -> bool {
        self.slots.iter().all(|s| match &s.active {
            Active::Script { progress, .. } => progress.done,
            _ => true,
        })
    }
}

fn activate(binding: &ControllerBinding, c: &Controller, params: &AiParams) -> Result<Active, AgentError> {
    let id = binding.agent_id;
    let kind_ok = match c {
        Controller::Replay { .. } => true,
        other => other.drives() == binding.kind,
    };
    if !kind_ok {
        return Err(AgentError::Binding {
            id,
            reason: format!("{} controller cannot drive a {}", c.label(), binding.kind),
        });
    }
    Ok(match c {
        Controller::VehicleAi { route } => {
            let problems = route.violations(params.limits.v_max_car);
            if !problems.is_empty() {
                return Err(AgentError::Binding {
                    id,
                    reason: problems.join("; "),
                });
            }
            Active::Ai {
                route: route.clone(),
                memory: AiMemory::default(),
            }
        }
        Controller::Scripted { script } => {
            let problems = script.violations(params.limits.v_max_ped);
            if !problems.is_empty() {
                return Err(AgentError::Binding {
                    id,
                    reason: problems.join("; "),
                });
            }
            Active::Script {
                script: script.clone(),
                progress: ScriptProgress::default(),
            }
        }
        Controller::Live { role } => Active::Live(*role),
        Controller::ManualVehicle { role } => Active::Manual(*role),
        // a stream binding outside replay mode with no fallback
        Controller::Replay { .. } => Active::Idle,
    })
}
