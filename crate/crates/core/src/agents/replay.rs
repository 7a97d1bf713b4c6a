use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::sim::{AgentId, AgentKind, Command, DriveCommand, WalkCommand};

use super::AgentError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayHeader {
    pub scenario: String,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplayEntry {
    pub frame: u64,
    pub id: AgentId,
    pub cmd: Command,
}

/// Per-frame command stream for the agents that are not driven by the
/// vehicle policy. Entries are ordered by `(frame, id)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayLog {
    pub header: ReplayHeader,
    entries: Vec<ReplayEntry>,
    index: BTreeMap<(u64, AgentId), usize>,
}

impl ReplayLog {
    pub fn new(scenario: impl Into<String>, seed: u64) -> Self {
        Self {
            header: ReplayHeader {
                scenario: scenario.into(),
                seed,
            },
            entries: Vec::new(),
            index: BTreeMap::new(),
        }
    }

    /// Append an entry. Frames must be non-decreasing and each
    /// `(frame, id)` may appear once.
    pub fn push(&mut self, entry: ReplayEntry) -> Result<(), AgentError> {
        if let Some(last) = self.entries.last() {
            if entry.frame < last.frame {
                return Err(AgentError::ReplayOrder {
                    frame: entry.frame,
                    previous: last.frame,
                });
            }
        }
        let key = (entry.frame, entry.id);
        if self.index.contains_key(&key) {
            return Err(AgentError::ReplayDuplicate {
                frame: entry.frame,
                id: entry.id,
            });
        }
        self.index.insert(key, self.entries.len());
        self.entries.push(entry);
        Ok(())
    }

    pub fn entries(&self) -> &[ReplayEntry] {
        &self.entries
    }

    pub fn agent_ids(&self) -> impl Iterator<Item = AgentId> + '_ {
        let mut ids: Vec<AgentId> = self.entries.iter().map(|e| e.id).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.into_iter()
    }

    pub fn get(&self, frame: u64, id: AgentId) -> Option<&Command> {
        self.index.get(&(frame, id)).map(|&i| &self.entries[i].cmd)
    }

    /// One past the last recorded frame.
    pub fn end_frame(&self) -> u64 {
        self.entries.last().map_or(0, |e| e.frame + 1)
    }
}

/// The command recorded for `id` at `frame`. Frames without an entry yield
/// the dropout default for the agent kind: halt (facing `hold_yaw`) for
/// pedestrians, coast for cars.
pub fn replay_command(
    log: &ReplayLog,
    id: AgentId,
    kind: AgentKind,
    frame: i64,
    hold_yaw: f64,
) -> Result<Command, AgentError> {
    if frame < 0 {
        return Err(AgentError::NegativeFrame(frame));
    }
    Ok(match log.get(frame as u64, id) {
        Some(cmd) => *cmd,
        None => match kind {
            AgentKind::Car => Command::Drive(DriveCommand::COAST),
            AgentKind::Pedestrian => Command::Walk(WalkCommand::halt(hold_yaw)),
        },
    })
}
