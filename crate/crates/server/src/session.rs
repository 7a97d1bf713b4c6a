//! The synchronous session state machine. The actor in `actor.rs` owns one
//! of these and is the only caller, so nothing here locks.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use pedsim_core::agents::{ControlMode, InputMessage, LiveInputs, Role};
use pedsim_core::runner::{write_episode, Episode, RunError, ScenarioSource};
use pedsim_core::scenarios::ScenarioSpec;
use pedsim_core::sim::WorldSnapshot;
use serde::Serialize;
use thiserror::Error;
use tokio::sync::mpsc;

use crate::messages::{Event, FinishReason, FinishRecord, ServerMessage, SessionState, StateMessage};

/// Messages a connection may have queued before it counts as a slow consumer.
pub const BACKLOG: usize = 64;

pub type ConnId = u64;
pub type Outbox = mpsc::Receiver<Arc<str>>;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),
    #[error("role {0} is not offered by this session")]
    RoleNotOffered(Role),
    #[error("role {0} already has a client")]
    RoleTaken(Role),
    #[error("waiting for roles: {}", list(.0))]
    MissingRoles(Vec<Role>),
    #[error("session is {0:?}")]
    WrongState(SessionState),
    #[error("unknown connection {0}")]
    UnknownConnection(ConnId),
    #[error("connection holds role {held}, message is for {sent}")]
    RoleMismatch { held: Role, sent: Role },
    #[error(transparent)]
    Run(#[from] RunError),
}

fn list(roles: &[Role]) -> String {
    roles.iter().map(|r| r.as_str()).collect::<Vec<_>>().join(", ")
}

/// Fan-out of serialized messages to every connection. A connection whose
/// queue is full is removed.
#[derive(Debug, Default)]
pub struct Broadcaster {
    conns: BTreeMap<ConnId, mpsc::Sender<Arc<str>>>,
}

impl Broadcaster {
    pub fn add(&mut self, id: ConnId) -> Outbox {
        let (tx, rx) = mpsc::channel(BACKLOG);
        self.conns.insert(id, tx);
        rx
    }

    pub fn remove(&mut self, id: ConnId) -> bool {
        self.conns.remove(&id).is_some()
    }

    pub fn len(&self) -> usize {
        self.conns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.conns.is_empty()
    }

    /// Returns the connections dropped as slow or closed.
    pub fn send_all(&mut self, msg: &ServerMessage) -> Vec<ConnId> {
        let text: Arc<str> = msg.to_text().into();
        let mut dropped = Vec::new();
        for (id, tx) in &self.conns {
            if tx.try_send(text.clone()).is_err() {
                dropped.push(*id);
            }
        }
        for id in &dropped {
            self.conns.remove(id);
        }
        dropped
    }

    /// False if the connection is gone or was dropped for backlog.
    pub fn send_to(&mut self, id: ConnId, msg: &ServerMessage) -> bool {
        let Some(tx) = self.conns.get(&id) else { return false };
        if tx.try_send(msg.to_text().into()).is_ok() {
            return true;
        }
        self.conns.remove(&id);
        false
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct InputCounters {
    pub accepted: u64,
    /// Queued but replaced by a later message before a tick consumed it.
    pub superseded: u64,
    pub out_of_order: u64,
    pub malformed: u64,
    pub ignored: u64,
}

/// What happened to one incoming input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ingest {
    Queued,
    OutOfOrder,
    Malformed,
    /// Arrived outside the running state.
    Ignored,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionStatus {
    pub session_id: String,
    pub scenario: String,
    pub seed: u64,
    pub state: SessionState,
    pub roles: Vec<Role>,
    pub connected: Vec<Role>,
    pub observers: usize,
    pub frame: u64,
    pub inputs: InputCounters,
    pub finish: Option<FinishRecord>,
}

pub struct SessionCore {
    id: String,
    spec: ScenarioSpec,
    roles: Vec<Role>,
    state: SessionState,
    episode: Option<Episode>,
    frame: u64,
    out_dir: PathBuf,
    conns: BTreeMap<ConnId, Role>,
    owners: BTreeMap<Role, ConnId>,
    last_seq: BTreeMap<ConnId, u64>,
    queues: BTreeMap<Role, Vec<InputMessage>>,
    counters: InputCounters,
    next_conn: ConnId,
    finished: Option<FinishRecord>,
    out: Broadcaster,
}

/// Resolve a scenario name the way sessions do: a built-in id or an
/// existing scenario file.
pub fn load_session_scenario(name: &str, seed: u64) -> Result<ScenarioSpec, SessionError> {
    let source = ScenarioSource::parse(name);
    if let ScenarioSource::File(path) = &source {
        if !path.is_file() {
            return Err(SessionError::UnknownScenario(name.to_string()));
        }
    }
    Ok(source.load(seed)?)
}

impl SessionCore {
    pub fn new(id: impl Into<String>, spec: ScenarioSpec, out_dir: PathBuf) -> Result<Self, SessionError> {
        let episode = Episode::new(spec.clone(), ControlMode::Live)?;
        let roles = episode.controllers().live_roles();
        Ok(Self {
            id: id.into(),
            spec,
            roles,
            state: SessionState::Lobby,
            episode: Some(episode),
            frame: 0,
            out_dir,
            conns: BTreeMap::new(),
            owners: BTreeMap::new(),
            last_seq: BTreeMap::new(),
            queues: BTreeMap::new(),
            counters: InputCounters::default(),
            next_conn: 1,
            finished: None,
            out: Broadcaster::default(),
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn spec(&self) -> &ScenarioSpec {
        &self.spec
    }

    pub fn state(&self) -> SessionState {
        self.state
    }

    /// Roles a human must fill before the session can start.
    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn connected_roles(&self) -> Vec<Role> {
        self.owners.keys().copied().collect()
    }

    pub fn counters(&self) -> InputCounters {
        self.counters
    }

    pub fn connections(&self) -> usize {
        self.out.len()
    }

    /// World mutations so far; stays put between ticks.
    pub fn world_mutations(&self) -> Option<u64> {
        self.episode.as_ref().map(|e| e.world().mutation_count())
    }

    /// The current frame; `None` once finished.
    pub fn snapshot(&self) -> Option<&WorldSnapshot> {
        self.episode.as_ref().map(|e| e.last_snapshot())
    }

    pub fn finished(&self) -> Option<&FinishRecord> {
        self.finished.as_ref()
    }

    pub fn status(&self) -> SessionStatus {
        SessionStatus {
            session_id: self.id.clone(),
            scenario: self.spec.id.clone(),
            seed: self.spec.seed,
            state: self.state,
            roles: self.roles.clone(),
            connected: self.connected_roles(),
            observers: self.conns.values().filter(|r| **r == Role::Observer).count(),
            frame: self.frame,
            inputs: self.counters,
            finish: self.finished.clone(),
        }
    }

    fn lobby_event(&self) -> ServerMessage {
        ServerMessage::Event(Event::Lobby {
            scenario: self.spec.id.clone(),
            seed: self.spec.seed,
            roles: self.roles.clone(),
            connected: self.connected_roles(),
        })
    }

    fn state_message(&self) -> Option<ServerMessage> {
        let ep = self.episode.as_ref()?;
        Some(ServerMessage::State(StateMessage::from_snapshot(ep.last_snapshot(), self.state)))
    }

    pub fn connect(&mut self, role: Role) -> Result<(ConnId, Outbox), SessionError> {
        if self.state == SessionState::Finished {
            return Err(SessionError::WrongState(self.state));
        }
        if role != Role::Observer {
            if !self.roles.contains(&role) {
                return Err(SessionError::RoleNotOffered(role));
            }
            if self.owners.contains_key(&role) {
                return Err(SessionError::RoleTaken(role));
            }
        }
        let id = self.next_conn;
        self.next_conn += 1;
        let rx = self.out.add(id);
        self.conns.insert(id, role);
        if role != Role::Observer {
            self.owners.insert(role, id);
        }
        let lobby = self.lobby_event();
        if self.state == SessionState::Lobby {
            self.broadcast(&lobby)?;
        } else {
            // late observer: lobby info, then the current frame
            self.out.send_to(id, &lobby);
            if let Some(s) = self.state_message() {
                self.out.send_to(id, &s);
            }
        }
        Ok((id, rx))
    }

    /// Drop a connection. Losing a role owner mid-session ends it.
    pub fn disconnect(&mut self, conn: ConnId) -> Result<Option<FinishRecord>, SessionError> {
        self.out.remove(conn);
        self.last_seq.remove(&conn);
        let Some(role) = self.conns.remove(&conn) else { return Ok(None) };
        if self.owners.get(&role) != Some(&conn) {
            return Ok(None);
        }
        self.owners.remove(&role);
        match self.state {
            SessionState::Running => self.finish(FinishReason::Disconnect).map(Some),
            SessionState::Lobby => {
                let lobby = self.lobby_event();
                self.broadcast(&lobby)?;
                Ok(None)
            }
            SessionState::Finished => Ok(None),
        }
    }

    /// Lobby to running. Sends the start event and the frame-0 state.
    pub fn start(&mut self) -> Result<(), SessionError> {
        if self.state != SessionState::Lobby {
            return Err(SessionError::WrongState(self.state));
        }
        let missing: Vec<Role> = self.roles.iter().copied().filter(|r| !self.owners.contains_key(r)).collect();
        if !missing.is_empty() {
            return Err(SessionError::MissingRoles(missing));
        }
        self.state = SessionState::Running;
        self.broadcast(&ServerMessage::Event(Event::Start { frame: self.frame }))?;
        if let Some(s) = self.state_message() {
            self.broadcast(&s)?;
        }
        Ok(())
    }

    /// Queue one parsed client message. A role mismatch also sends an
    /// error event to that connection.
    pub fn ingest(&mut self, conn: ConnId, msg: Result<InputMessage, String>) -> Result<Ingest, SessionError> {
        let Some(&held) = self.conns.get(&conn) else {
            return Err(SessionError::UnknownConnection(conn));
        };
        let msg = match msg {
            Ok(m) => m,
            Err(_) => {
                self.counters.malformed += 1;
                return Ok(Ingest::Malformed);
            }
        };
        if self.state != SessionState::Running {
            self.counters.ignored += 1;
            return Ok(Ingest::Ignored);
        }
        if held != msg.role || held == Role::Observer {
            let err = SessionError::RoleMismatch { held, sent: msg.role };
            self.out.send_to(conn, &ServerMessage::Event(Event::Error { message: err.to_string() }));
            return Err(err);
        }
        if msg.validate().is_err() {
            self.counters.malformed += 1;
            return Ok(Ingest::Malformed);
        }
        if self.last_seq.get(&conn).is_some_and(|last| msg.seq <= *last) {
            self.counters.out_of_order += 1;
            return Ok(Ingest::OutOfOrder);
        }
        self.last_seq.insert(conn, msg.seq);
        self.queues.entry(msg.role).or_default().push(msg);
        self.counters.accepted += 1;
        Ok(Ingest::Queued)
    }

    /// Advance one frame with the latest queued input per role and
    /// broadcast the result. Finishes the session when the world terminates.
    pub fn tick(&mut self) -> Result<Option<FinishRecord>, SessionError> {
        if self.state != SessionState::Running {
            return Err(SessionError::WrongState(self.state));
        }
        let mut inputs = LiveInputs::none();
        for (role, queue) in std::mem::take(&mut self.queues) {
            if let Some(last) = queue.last() {
                self.counters.superseded += queue.len() as u64 - 1;
                inputs.latest.insert(role, last.payload);
            }
        }
        let ep = self.episode.as_mut().expect("running session has an episode");
        let snap = ep.tick(&inputs)?;
        self.frame = snap.frame;
        let msg = ServerMessage::State(StateMessage::from_snapshot(snap, self.state));
        let done = ep.is_done();
        let reason = ep.world().terminated();
        self.broadcast(&msg)?;
        if self.state == SessionState::Finished {
            // a role owner was dropped for backlog
            return Ok(self.finished.clone());
        }
        if done {
            let reason = reason.map(FinishReason::from_termination).unwrap_or(FinishReason::Timeout);
            return self.finish(reason).map(Some);
        }
        Ok(None)
    }

    /// Persist the replay and, when long enough, the scene. Repeated calls
    /// return the first record.
    pub fn finish(&mut self, reason: FinishReason) -> Result<FinishRecord, SessionError> {
        if let Some(done) = &self.finished {
            return Ok(done.clone());
        }
        let ep = self.episode.take().expect("unfinished session has an episode");
        let output = ep.finish();
        let written = write_episode(&output, &self.out_dir)?;
        let record = FinishRecord {
            reason,
            frames: written.frames,
            scene: written.scene,
            scene_error: written.scene_error,
            replay: written.replay,
        };
        self.state = SessionState::Finished;
        self.finished = Some(record.clone());
        self.out.send_all(&ServerMessage::Event(Event::Finish(record.clone())));
        // closing the queues ends every connection once it has drained
        self.out = Broadcaster::default();
        Ok(record)
    }

    /// Send to everyone. Clients dropped for backlog are disconnected,
    /// which may end the session.
    fn broadcast(&mut self, msg: &ServerMessage) -> Result<(), SessionError> {
        for conn in self.out.send_all(msg) {
            self.disconnect(conn)?;
        }
        Ok(())
    }
}
