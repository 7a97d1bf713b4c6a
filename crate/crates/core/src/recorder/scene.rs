use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::sim::{AgentId, AgentKind, Shape, RATE_HZ};

use super::record::{frame_time, AgentFrameRecord};
use super::RecorderError;

pub const SCENE_FORMAT: &str = "carla-vr-scene/1";
pub const SCENE_EXT: &str = ".scene.jsonl";
pub const MIN_SCENE_S: u64 = 10;
pub const MAX_SCENE_S: u64 = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentInfo {
    pub id: AgentId,
    pub kind: AgentKind,
    pub shape: Shape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneHeader {
    pub format: String,
    pub scenario: String,
    pub seed: u64,
    pub rate_hz: u32,
    pub frames: u64,
    pub truncated: bool,
    pub agents: Vec<AgentInfo>,
}

impl SceneHeader {
    /// Header for a fresh 20 Hz recording; `frames` is filled in by
    /// [`finalize_scene`].
    pub fn new(scenario: impl Into<String>, seed: u64, mut agents: Vec<AgentInfo>) -> Self {
        agents.sort_by_key(|a| a.id);
        Self {
            format: SCENE_FORMAT.to_string(),
            scenario: scenario.into(),
            seed,
            rate_hz: RATE_HZ,
            frames: 0,
            truncated: false,
            agents,
        }
    }

    pub fn duration_s(&self) -> f64 {
        self.frames as f64 / self.rate_hz as f64
    }

    pub fn agent(&self, id: AgentId) -> Option<&AgentInfo> {
        self.agents.iter().find(|a| a.id == id)
    }
}

/// A recorded scene: header plus records sorted by `(frame, id)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneFile {
    pub header: SceneHeader,
    pub records: Vec<AgentFrameRecord>,
}

impl SceneFile {
    pub fn agent_count(&self) -> usize {
        self.header.agents.len()
    }

    /// Records of frame `frame`, in id order.
    pub fn frame(&self, frame: u64) -> &[AgentFrameRecord] {
        let n = self.agent_count();
        let start = frame as usize * n;
        &self.records[start..start + n]
    }

    /// All records of one agent, in frame order.
    pub fn track(&self, id: AgentId) -> Vec<&AgentFrameRecord> {
        self.records.iter().filter(|r| r.id == id).collect()
    }

    /// All invariant violations; the first one is reported by [`read_scene`].
    pub fn validate(&self) -> Result<(), RecorderError> {
        let h = &self.header;
        if h.format != SCENE_FORMAT {
            return Err(RecorderError::Format(h.format.clone()));
        }
        if !supported_rate(h.rate_hz) {
            return Err(RecorderError::UnsupportedRate(h.rate_hz));
        }
        check_duration(h.frames, h.rate_hz)?;
        let ids: Vec<AgentId> = h.agents.iter().map(|a| a.id).collect();
        if ids.is_empty() || ids.windows(2).any(|w| w[0] >= w[1]) {
            return Err(RecorderError::Invalid("agent table must be non-empty with ascending unique ids".into()));
        }
        if h.agents.iter().any(|a| !a.shape.is_valid()) {
            return Err(RecorderError::Invalid("agent shape must be strictly positive".into()));
        }
        let expected = h.frames as usize * ids.len();
        if self.records.len() != expected {
            return Err(RecorderError::Invalid(format!(
                "{} records, expected {} frames x {} agents = {expected}",
                self.records.len(),
                h.frames,
                ids.len()
            )));
        }
        for (i, r) in self.records.iter().enumerate() {
            let frame = (i / ids.len()) as u64;
            let id = ids[i % ids.len()];
            if r.frame != frame || r.id != id {
                return Err(RecorderError::Invalid(format!(
                    "record {i} is (frame {}, id {}), expected (frame {frame}, id {id})",
                    r.frame, r.id
                )));
            }
            if (r.t - frame_time(frame, h.rate_hz)).abs() > 1e-9 {
                return Err(RecorderError::Invalid(format!("record {i}: t = {} does not match frame {frame}", r.t)));
            }
            r.check()?;
        }
        Ok(())
    }
}

/// Rates a 20 Hz recording can be decimated to.
pub fn supported_rate(rate_hz: u32) -> bool {
    rate_hz > 0 && RATE_HZ.is_multiple_of(rate_hz)
}

fn check_duration(frames: u64, rate_hz: u32) -> Result<(), RecorderError> {
    let rate = rate_hz as u64;
    if frames < MIN_SCENE_S * rate {
        return Err(RecorderError::TooShort {
            frames,
            seconds: frames as f64 / rate_hz as f64,
        });
    }
    if frames > MAX_SCENE_S * rate {
        return Err(RecorderError::TooLong {
            frames,
            seconds: frames as f64 / rate_hz as f64,
        });
    }
    Ok(())
}

/// Assemble a 20 Hz scene from captured records.
///
/// The records must form a complete frame x agent grid starting at frame 0.
/// Recordings shorter than 10 s are rejected; longer than 30 s are cut at
/// 30 s and flagged.
pub fn finalize_scene(mut records: Vec<AgentFrameRecord>, mut header: SceneHeader) -> Result<SceneFile, RecorderError> {
    records.sort_by_key(|r| (r.frame, r.id));
    let ids: BTreeSet<AgentId> = header.agents.iter().map(|a| a.id).collect();
    if let Some(r) = records.iter().find(|r| !ids.contains(&r.id)) {
        return Err(RecorderError::Invalid(format!("record for agent {} missing from the agent table", r.id)));
    }
    if let Some(w) = records.windows(2).find(|w| (w[0].frame, w[0].id) == (w[1].frame, w[1].id)) {
        return Err(RecorderError::Invalid(format!("duplicate record (frame {}, id {})", w[0].frame, w[0].id)));
    }
    let frames = records.last().map_or(0, |r| r.frame + 1);
    if records.len() != frames as usize * ids.len() {
        let present: BTreeSet<(u64, AgentId)> = records.iter().map(|r| (r.frame, r.id)).collect();
        let missing: Vec<(u64, AgentId)> = (0..frames)
            .flat_map(|f| ids.iter().map(move |&id| (f, id)))
            .filter(|k| !present.contains(k))
            .collect();
        return Err(RecorderError::Holes(missing));
    }

    let rate = header.rate_hz as u64;
    if frames < MIN_SCENE_S * rate {
        return Err(RecorderError::TooShort {
            frames,
            seconds: frames as f64 / header.rate_hz as f64,
        });
    }
    let max_frames = MAX_SCENE_S * rate;
    header.truncated = frames > max_frames;
    header.frames = frames.min(max_frames);
    records.truncate(header.frames as usize * ids.len());

    let scene = SceneFile { header, records };
    scene.validate()?;
    Ok(scene)
}

/// Keep every `rate_hz / target_hz`-th frame starting at frame 0. Kept
/// records are unchanged apart from their frame index.
pub fn resample_scene(scene: &SceneFile, target_hz: u32) -> Result<SceneFile, RecorderError> {
    let rate = scene.header.rate_hz;
    if target_hz == 0 || target_hz > rate || !rate.is_multiple_of(target_hz) {
        return Err(RecorderError::Resample { from: rate, to: target_hz });
    }
    let stride = (rate / target_hz) as u64;
    let records = scene
        .records
        .iter()
        .filter(|r| r.frame % stride == 0)
        .map(|r| AgentFrameRecord {
            frame: r.frame / stride,
            ..*r
        })
        .collect();
    let header = SceneHeader {
        rate_hz: target_hz,
        frames: scene.header.frames.div_ceil(stride),
        ..scene.header.clone()
    };
    Ok(SceneFile { header, records })
}

/// Scene file text: header line, then one record per line.
pub fn write_scene(scene: &SceneFile) -> String {
    let mut out = serde_json::to_string(&scene.header).expect("header serializes");
    out.push('\n');
    for r in &scene.records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}

/// Parse and validate a scene file.
pub fn read_scene(text: &str) -> Result<SceneFile, RecorderError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines.next().ok_or(RecorderError::Empty)?;
    let header: SceneHeader = serde_json::from_str(first).map_err(|e| RecorderError::Line {
        line: 1,
        message: e.to_string(),
    })?;
    if header.format != SCENE_FORMAT {
        return Err(RecorderError::Format(header.format));
    }
    if !supported_rate(header.rate_hz) {
        return Err(RecorderError::UnsupportedRate(header.rate_hz));
    }
    let mut records = Vec::new();
    for (i, line) in lines {
        let r: AgentFrameRecord = serde_json::from_str(line).map_err(|e| RecorderError::Line {
            line: i + 1,
            message: e.to_string(),
        })?;
        records.push(r);
    }
    let scene = SceneFile { header, records };
    scene.validate()?;
    Ok(scene)
}

/// Corpus-level counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub scenes: usize,
    pub frames: u64,
    pub records: u64,
    /// Frames counted after decimation to 2 Hz.
    pub frames_2hz: u64,
    pub mean_duration_s: f64,
}

pub fn corpus_stats(scenes: &[SceneFile]) -> CorpusStats {
    let frames: u64 = scenes.iter().map(|s| s.header.frames).sum();
    let records = scenes.iter().map(|s| s.header.frames * s.agent_count() as u64).sum();
    let frames_2hz = scenes
        .iter()
        .map(|s| {
            let stride = (s.header.rate_hz / 2).max(1) as u64;
            s.header.frames.div_ceil(stride)
        })
        .sum();
    let mean_duration_s = if scenes.is_empty() {
        0.0
    } else {
        scenes.iter().map(|s| s.header.duration_s()).sum::<f64>() / scenes.len() as f64
    };
    CorpusStats {
        scenes: scenes.len(),
        frames,
        records,
        frames_2hz,
        mean_duration_s,
    }
}
