//! One task per session. Connection handlers and HTTP routes talk to it
//! through a command channel; it alone ticks the world.

use std::time::Duration;

use pedsim_core::agents::Role;
use thiserror::Error;
use tokio::sync::{mpsc, oneshot};
use tokio::time::{interval, MissedTickBehavior};

use crate::messages::{parse_client, ClientMessage, FinishReason, FinishRecord};
use crate::session::{ConnId, Outbox, SessionCore, SessionError, SessionStatus};

type Reply<T> = oneshot::Sender<Result<T, SessionError>>;

pub enum Command {
    Connect { role: Role, reply: Reply<(ConnId, Outbox)> },
    Input { conn: ConnId, text: String },
    Disconnect { conn: ConnId },
    Start { reply: Reply<SessionStatus> },
    Stop { reply: Reply<FinishRecord> },
    Status { reply: oneshot::Sender<SessionStatus> },
}

#[derive(Debug, Error)]
pub enum ActorError {
    #[error("session task has exited")]
    Gone,
    #[error(transparent)]
    Session(#[from] SessionError),
}

/// Cheap to clone; every clone talks to the same task.
#[derive(Clone)]
pub struct SessionHandle {
    pub id: String,
    tx: mpsc::UnboundedSender<Command>,
}

impl SessionHandle {
    async fn ask<T>(&self, make: impl FnOnce(Reply<T>) -> Command) -> Result<T, ActorError> {
        let (reply, rx) = oneshot::channel();
        self.tx.send(make(reply)).map_err(|_| ActorError::Gone)?;
        Ok(rx.await.map_err(|_| ActorError::Gone)??)
    }

    pub async fn connect(&self, role: Role) -> Result<(ConnId, Outbox), ActorError> {
        self.ask(|reply| Command::Connect { role, reply }).await
    }

    pub async fn start(&self) -> Result<SessionStatus, ActorError> {
        self.ask(|reply| Command::Start { reply }).await
    }

    pub async fn stop(&self) -> Result<FinishRecord, ActorError> {
        self.ask(|reply| Command::Stop { reply }).await
    }

    pub async fn status(&self) -> Result<SessionStatus, ActorError> {
        let (reply, rx) = oneshot::channel();
        self.tx.send(Command::Status { reply }).map_err(|_| ActorError::Gone)?;
        rx.await.map_err(|_| ActorError::Gone)
    }

    pub fn input(&self, conn: ConnId, text: String) {
        let _ = self.tx.send(Command::Input { conn, text });
    }

    pub fn disconnect(&self, conn: ConnId) {
        let _ = self.tx.send(Command::Disconnect { conn });
    }
}

/// Move `core` onto its own task, ticking every `period` while running.
pub fn spawn_session(core: SessionCore, period: Duration) -> SessionHandle {
    let (tx, rx) = mpsc::unbounded_channel();
    let id = core.id().to_string();
    tokio::spawn(run(core, rx, period));
    SessionHandle { id, tx }
}

async fn run(mut core: SessionCore, mut rx: mpsc::UnboundedReceiver<Command>, period: Duration) {
    let mut clock = interval(period);
    clock.set_missed_tick_behavior(MissedTickBehavior::Burst);
    loop {
        let running = core.state() == crate::SessionState::Running;
        tokio::select! {
            biased;
            cmd = rx.recv() => {
                let Some(cmd) = cmd else { break };
                let was_lobby = core.state() == crate::SessionState::Lobby;
                handle(&mut core, cmd);
                if was_lobby && core.state() == crate::SessionState::Running {
                    clock.reset();
                }
            }
            _ = clock.tick(), if running => {
                if let Err(e) = core.tick() {
                    // the episode cannot continue; keep what was recorded
                    eprintln!("session {}: {e}", core.id());
                    let _ = core.finish(FinishReason::OperatorStop);
                }
            }
        }
    }
}

fn handle(core: &mut SessionCore, cmd: Command) {
    match cmd {
        Command::Connect { role, reply } => {
            let _ = reply.send(core.connect(role));
        }
        Command::Input { conn, text } => {
            let parsed = parse_client(&text).map(|ClientMessage::Input(m)| m);
            // role mismatches are reported to the client by the core
            let _ = core.ingest(conn, parsed);
        }
        Command::Disconnect { conn } => {
            if let Err(e) = core.disconnect(conn) {
                eprintln!("session {}: {e}", core.id());
            }
        }
        Command::Start { reply } => {
            let _ = reply.send(core.start().map(|_| core.status()));
        }
        Command::Stop { reply } => {
            let _ = reply.send(core.finish(FinishReason::OperatorStop));
        }
        Command::Status { reply } => {
            let _ = reply.send(core.status());
        }
    }
}
