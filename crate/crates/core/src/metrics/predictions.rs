use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;
use crate::sim::AgentId;

use super::MetricsError;

pub const PRED_EXT: &str = ".pred.jsonl";
pub const DEFAULT_K: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionHeader {
    pub scene: String,
    pub rate_hz: u32,
    pub horizon_steps: usize,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PredictionLine {
    id: AgentId,
    k: usize,
    traj: Vec<Vec2>,
}

/// K future samples per agent for one scene. `agents[id][k]` has
/// `horizon_steps` points.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    pub header: PredictionHeader,
    pub agents: BTreeMap<AgentId, Vec<Vec<Vec2>>>,
}

impl PredictionSet {
    pub fn validate(&self) -> Result<(), MetricsError> {
        let h = &self.header;
        let bad = |m: String| Err(MetricsError::InvalidPrediction(m));
        if h.k == 0 || h.horizon_steps == 0 || h.rate_hz == 0 {
            return bad("k, horizon_steps and rate_hz must be positive".into());
        }
        if self.agents.is_empty() {
            return bad("no agents".into());
        }
        for (id, samples) in &self.agents {
            if samples.len() != h.k {
                return bad(format!("agent {id} has {} samples, expected {}", samples.len(), h.k));
            }
            for (k, s) in samples.iter().enumerate() {
                if s.len() != h.horizon_steps {
                    return bad(format!("agent {id} sample {k} has {} points, expected {}", s.len(), h.horizon_steps));
                }
                if !s.iter().all(|p| p.is_finite()) {
                    return bad(format!("agent {id} sample {k} has a non-finite point"));
                }
            }
        }
        Ok(())
    }

    /// The first `k` samples of every agent.
    pub fn truncate_k(&self, k: usize) -> PredictionSet {
        PredictionSet {
            header: PredictionHeader { k, ..self.header.clone() },
            agents: self
                .agents
                .iter()
                .map(|(id, s)| (*id, s[..k.min(s.len())].to_vec()))
                .collect(),
        }
    }
}

pub fn write_predictions(set: &PredictionSet) -> String {
    let mut out = serde_json::to_string(&set.header).expect("header serializes");
    out.push('\n');
    for (id, samples) in &set.agents {
        for (k, traj) in samples.iter().enumerate() {
            let line = PredictionLine {
                id: *id,
                k,
                traj: traj.clone(),
            };
            out.push_str(&serde_json::to_string(&line).expect("line serializes"));
            out.push('\n');
        }
    }
    out
}

/// Parse and validate a prediction file. Lines may come in any order but
/// every `(id, k)` must appear exactly once.
pub fn read_predictions(text: &str) -> Result<PredictionSet, MetricsError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines.next().ok_or(MetricsError::EmptyFile)?;
    let header: PredictionHeader = serde_json::from_str(first).map_err(|e| MetricsError::Line {
        line: 1,
        message: e.to_string(),
    })?;
    let mut slots: BTreeMap<AgentId, Vec<Option<Vec<Vec2>>>> = BTreeMap::new();
    for (i, text) in lines {
        let line_err = |message: String| MetricsError::Line { line: i + 1, message };
        let l: PredictionLine = serde_json::from_str(text).map_err(|e| line_err(e.to_string()))?;
        if l.k >= header.k {
            return Err(line_err(format!("sample index {} outside 0..{}", l.k, header.k)));
        }
        let slot = &mut slots.entry(l.id).or_insert_with(|| vec![None; header.k])[l.k];
        if slot.is_some() {
            return Err(line_err(format!("duplicate sample (id {}, k {})", l.id, l.k)));
        }
        *slot = Some(l.traj);
    }
    let mut agents = BTreeMap::new();
    for (id, samples) in slots {
        let samples: Option<Vec<_>> = samples.into_iter().collect();
        let samples = samples.ok_or_else(|| MetricsError::InvalidPrediction(format!("agent {id} is missing samples")))?;
        agents.insert(id, samples);
    }
    let set = PredictionSet { header, agents };
    set.validate()?;
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set() -> PredictionSet {
        let traj = |y: f64| vec![Vec2::new(0.1, y), Vec2::new(1.0 / 3.0, y)];
        PredictionSet {
            header: PredictionHeader {
                scene: "jaywalk_000001".into(),
                rate_hz: 2,
                horizon_steps: 2,
                k: 2,
            },
            agents: BTreeMap::from([(1, vec![traj(0.0), traj(1.0)]), (4, vec![traj(2.0), traj(3.0)])]),
        }
    }

    #[test]
    fn round_trip() {
        let s = set();
        let text = write_predictions(&s);
        assert!(text.starts_with("{\"scene\":\"jaywalk_000001\",\"rate_hz\":2,\"horizon_steps\":2,\"k\":2}\n"));
        assert_eq!(read_predictions(&text).unwrap(), s);
    }

    #[test]
    fn rejects_missing_and_duplicate_samples() {
        let text = write_predictions(&set());
        let mut lines: Vec<&str> = text.lines().collect();
        let last = lines.pop().unwrap();
        assert!(matches!(read_predictions(&lines.join("\n")), Err(MetricsError::InvalidPrediction(_))));
        lines.push(lines[1]);
        assert!(matches!(read_predictions(&lines.join("\n")), Err(MetricsError::Line { line: 5, .. })));
        let short = text.replace(last, r#"{"id":4,"k":1,"traj":[[0,0]]}"#);
        assert!(matches!(read_predictions(&short), Err(MetricsError::InvalidPrediction(_))));
    }
}
