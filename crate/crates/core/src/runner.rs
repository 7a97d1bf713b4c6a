//! Episodes: a world, its controllers and the recording, stepped together.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::agents::{AgentError, ControlMode, ControllerSet, LiveInputs, ReplayLog};
use crate::recorder::{
    capture_frame, finalize_scene, read_replay, write_replay, write_scene, AgentFrameRecord, AgentInfo, RecorderError,
    SceneFile, SceneHeader, REPLAY_EXT, SCENE_EXT,
};
use crate::scenarios::{builtin_scenario, load_scenario, ScenarioError, ScenarioSpec};
use crate::sim::{SimError, TerminationReason, World, WorldSnapshot};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Recorder(#[from] RecorderError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("replay log is for {log_scenario:?}, not {scenario:?}")]
    ReplayMismatch { log_scenario: String, scenario: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// One simulated session. Frame 0 is recorded on construction and every
/// [`Episode::tick`] records the post-step frame.
pub struct Episode {
    spec: ScenarioSpec,
    world: World,
    controllers: ControllerSet,
    records: Vec<AgentFrameRecord>,
    last: WorldSnapshot,
}

/// What an episode leaves behind.
#[derive(Debug, Clone)]
pub struct EpisodeOutput {
    pub scenario: String,
    pub seed: u64,
    /// The finalized scene, or why the recording is not a valid scene.
    pub scene: Result<SceneFile, RecorderError>,
    pub replay: ReplayLog,
    pub reason: Option<TerminationReason>,
    pub frames: u64,
}

impl Episode {
    pub fn new(spec: ScenarioSpec, mode: ControlMode) -> Result<Self, RunError> {
        if let ControlMode::Replay(log) = &mode {
            if log.header.scenario != spec.id {
                return Err(RunError::ReplayMismatch {
                    log_scenario: log.header.scenario.clone(),
                    scenario: spec.id.clone(),
                });
            }
        }
        let world = spec.build_world()?;
        let controllers = ControllerSet::new(&spec.bindings(), spec.params, mode, &spec.id, spec.seed)?;
        let last = world.snapshot();
        let records = capture_frame(&last)?;
        Ok(Self {
            spec,
            world,
            controllers,
            records,
            last,
        })
    }

    pub fn spec(&self) -> &ScenarioSpec {
        &self.spec
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn controllers(&self) -> &ControllerSet {
        &self.controllers
    }

    pub fn last_snapshot(&self) -> &WorldSnapshot {
        &self.last
    }

    pub fn is_done(&self) -> bool {
        self.world.is_terminated()
    }

    /// Compute commands for the current frame, step, and record.
    pub fn tick(&mut self, inputs: &LiveInputs) -> Result<&WorldSnapshot, RunError> {
        let commands = self.controllers.commands(&self.last, inputs)?;
        let snap = self.world.step(&commands)?;
        self.records.extend(capture_frame(&snap)?);
        self.last = snap;
        Ok(&self.last)
    }

    /// Tick without live input until the world terminates.
    pub fn run_to_end(&mut self) -> Result<(), RunError> {
        let none = LiveInputs::none();
        while !self.world.is_terminated() {
            self.tick(&none)?;
        }
        Ok(())
    }

    pub fn finish(self) -> EpisodeOutput {
        let agents = self
            .spec
            .agents
            .iter()
            .map(|a| AgentInfo {
                id: a.id,
                kind: a.kind,
                shape: a.shape,
            })
            .collect();
        let header = SceneHeader::new(self.spec.id.clone(), self.spec.seed, agents);
        let frames = self.world.frame() + 1;
        EpisodeOutput {
            scenario: self.spec.id.clone(),
            seed: self.spec.seed,
            scene: finalize_scene(self.records, header),
            replay: self.controllers.into_replay_log(),
            reason: self.world.terminated(),
            frames,
        }
    }
}

/// Simulate `spec` headlessly to termination.
pub fn run_headless(spec: ScenarioSpec) -> Result<EpisodeOutput, RunError> {
    let mut ep = Episode::new(spec, ControlMode::Headless)?;
    ep.run_to_end()?;
    Ok(ep.finish())
}

/// Re-simulate a recorded session from its replay log. Stops where the log
/// ends if the session was cut short (operator stop, disconnect).
pub fn run_replay(spec: ScenarioSpec, log: ReplayLog) -> Result<EpisodeOutput, RunError> {
    let end = (!log.entries().is_empty()).then(|| log.end_frame());
    let mut ep = Episode::new(spec, ControlMode::Replay(Arc::new(log)))?;
    let none = LiveInputs::none();
    while !ep.is_done() && end.is_none_or(|e| ep.world.frame() < e) {
        ep.tick(&none)?;
    }
    Ok(ep.finish())
}

pub fn scene_file_name(scenario: &str, seed: u64) -> String {
    format!("{scenario}_{seed:06}{SCENE_EXT}")
}

pub fn replay_file_name(scenario: &str, seed: u64) -> String {
    format!("{scenario}_{seed:06}{REPLAY_EXT}")
}

/// Paths written for one episode. `scene` is `None` when the recording was
/// rejected; the replay is always written.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WrittenEpisode {
    pub seed: u64,
    pub scene: Option<PathBuf>,
    pub replay: PathBuf,
    pub frames: u64,
    pub duration_s: f64,
    pub reason: Option<String>,
    pub scene_error: Option<String>,
}

pub fn write_episode(out: &EpisodeOutput, dir: &Path) -> Result<WrittenEpisode, RunError> {
    let replay = dir.join(replay_file_name(&out.scenario, out.seed));
    fs::write(&replay, write_replay(&out.replay)).map_err(io_err(&replay))?;
    let (scene, scene_error) = match &out.scene {
        Ok(s) => {
            let path = dir.join(scene_file_name(&out.scenario, out.seed));
            fs::write(&path, write_scene(s)).map_err(io_err(&path))?;
            (Some(path), None)
        }
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(WrittenEpisode {
        seed: out.seed,
        scene,
        replay,
        frames: out.frames,
        duration_s: out.frames as f64 * crate::sim::DT,
        reason: out.reason.map(|r| r.label().to_string()),
        scene_error,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioSource {
    Builtin(String),
    File(PathBuf),
}

impl ScenarioSource {
    /// A built-in id, or a path to a scenario file.
    pub fn parse(s: &str) -> Self {
        if crate::scenarios::BUILTIN_IDS.contains(&s) {
            ScenarioSource::Builtin(s.to_string())
        } else {
            ScenarioSource::File(PathBuf::from(s))
        }
    }

    /// The scenario at `seed`. Files carry their own geometry; only the seed
    /// field is replaced.
    pub fn load(&self, seed: u64) -> Result<ScenarioSpec, RunError> {
        match self {
            ScenarioSource::Builtin(id) => Ok(builtin_scenario(id, seed)?),
            ScenarioSource::File(path) => {
                let text = fs::read_to_string(path).map_err(io_err(path))?;
                let spec = load_scenario(&text)?;
                Ok(ScenarioSpec { seed, ..spec })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PedestrianSource {
    Scripted,
    Replay(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioSource,
    pub seed: u64,
    pub pedestrian: PedestrianSource,
    pub out_dir: PathBuf,
    pub count: u32,
}

/// Fail early if `dir` cannot hold output files.
pub fn ensure_writable(dir: &Path) -> Result<(), RunError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let probe = dir.join(".pedsim-write-probe");
    fs::write(&probe, b"").map_err(io_err(dir))?;
    fs::remove_file(&probe).map_err(io_err(&probe))
}

/// Simulate `count` episodes at seeds `seed, seed + 1, ...` and write their
/// scene and replay files. With a replay pedestrian source a single episode
/// is re-simulated at the seed stored in the log.
pub fn run_batch(cfg: &RunConfig) -> Result<Vec<WrittenEpisode>, RunError> {
    let jobs: Vec<(ScenarioSpec, Option<ReplayLog>)> = match &cfg.pedestrian {
        PedestrianSource::Scripted => (0..cfg.count.max(1))
            .map(|i| Ok((cfg.scenario.load(cfg.seed + i as u64)?, None)))
            .collect::<Result<_, RunError>>()?,
        PedestrianSource::Replay(path) => {
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            let log = read_replay(&text)?;
            vec![(cfg.scenario.load(log.header.seed)?, Some(log))]
        }
    };
    ensure_writable(&cfg.out_dir)?;
    let mut written = Vec::with_capacity(jobs.len());
    for (spec, log) in jobs {
        let out = match log {
            None => run_headless(spec)?,
            Some(log) => run_replay(spec, log)?,
        };
        written.push(write_episode(&out, &cfg.out_dir)?);
    }
    Ok(written)
}
