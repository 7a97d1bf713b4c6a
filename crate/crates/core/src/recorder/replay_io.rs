use crate::agents::{ReplayEntry, ReplayHeader, ReplayLog};

use super::RecorderError;

pub const REPLAY_EXT: &str = ".replay.jsonl";

pub fn write_replay(log: &ReplayLog) -> String {
    let mut out = serde_json::to_string(&log.header).expect("header serializes");
    out.push('\n');
    for e in log.entries() {
        out.push_str(&serde_json::to_string(e).expect("entry serializes"));
        out.push('\n');
    }
    out
}

pub fn read_replay(text: &str) -> Result<ReplayLog, RecorderError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines.next().ok_or(RecorderError::Empty)?;
    let header: ReplayHeader = serde_json::from_str(first).map_err(|e| RecorderError::Line {
        line: 1,
        message: e.to_string(),
    })?;
    let mut log = ReplayLog::new(header.scenario, header.seed);
    for (i, line) in lines {
        let entry: ReplayEntry = serde_json::from_str(line).map_err(|e| RecorderError::Line {
            line: i + 1,
            message: e.to_string(),
        })?;
        log.push(entry).map_err(|e| RecorderError::Line {
            line: i + 1,
            message: e.to_string(),
        })?;
    }
    Ok(log)
}
