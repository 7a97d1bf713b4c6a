use std::borrow::Cow;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;
use crate::recorder::{resample_scene, SceneFile, SceneHeader};
use crate::sim::{AgentId, Shape};

use super::baseline::constant_velocity_baseline;
use super::collision::collision_indicators;
use super::displacement::{min_joint, min_marginal};
use super::predictions::{PredictionHeader, PredictionSet};
use super::MetricsError;

pub const EVAL_RATE_HZ: u32 = 2;
pub const DEFAULT_HISTORY_STEPS: usize = 4;
pub const DEFAULT_HORIZON_STEPS: usize = 6;

/// Which samples enter the collision rate: all K, or only the sample that
/// minimizes the scene's JADE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrMode {
    #[default]
    All,
    Best,
}

impl fmt::Display for CrMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CrMode::All => "all",
            CrMode::Best => "best",
        })
    }
}

impl FromStr for CrMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "all" => Ok(CrMode::All),
            "best" => Ok(CrMode::Best),
            _ => Err(format!("unknown cr mode {s:?} (expected all or best)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    /// Ground-truth frames before the prediction starts.
    pub history_steps: usize,
    /// Prefix of each predicted sample to score; `None` scores all of it.
    pub horizon_steps: Option<usize>,
    /// Score only the first `k` samples.
    pub k: Option<usize>,
    pub cr_mode: CrMode,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            history_steps: DEFAULT_HISTORY_STEPS,
            horizon_steps: None,
            k: None,
            cr_mode: CrMode::All,
        }
    }
}

/// Default scene id: the scene file name without its extension.
pub fn scene_id(header: &SceneHeader) -> String {
    format!("{}_{:06}", header.scenario, header.seed)
}

/// `scene` at `rate_hz`, decimating if it was recorded faster.
pub fn at_rate(scene: &SceneFile, rate_hz: u32) -> Result<Cow<'_, SceneFile>, MetricsError> {
    if scene.header.rate_hz == rate_hz {
        return Ok(Cow::Borrowed(scene));
    }
    resample_scene(scene, rate_hz)
        .map(Cow::Owned)
        .map_err(|_| MetricsError::Rate {
            pred: rate_hz,
            gt: scene.header.rate_hz,
        })
}

/// Ground-truth tracks split at `history_steps`, agents in id order.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalWindow {
    pub ids: Vec<AgentId>,
    pub shapes: Vec<Shape>,
    pub history: Vec<Vec<Vec2>>,
    pub future: Vec<Vec<Vec2>>,
}

pub fn eval_window(scene: &SceneFile, history_steps: usize, horizon_steps: usize) -> Result<EvalWindow, MetricsError> {
    let have = scene.header.frames as usize;
    let need = history_steps + horizon_steps;
    if history_steps == 0 || need > have {
        return Err(MetricsError::Window { need, have });
    }
    let n = scene.agent_count();
    let mut w = EvalWindow {
        ids: scene.header.agents.iter().map(|a| a.id).collect(),
        shapes: scene.header.agents.iter().map(|a| a.shape).collect(),
        history: vec![Vec::with_capacity(history_steps); n],
        future: vec![Vec::with_capacity(horizon_steps); n],
    };
    for f in 0..need {
        for (i, r) in scene.frame(f as u64).iter().enumerate() {
            if f < history_steps {
                w.history[i].push(r.xy());
            } else {
                w.future[i].push(r.xy());
            }
        }
    }
    Ok(w)
}

/// Per-scene results. `sum_*` are over agents so that corpus means weight
/// every agent equally.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SceneMetrics {
    pub scene: String,
    pub agents: usize,
    pub k: usize,
    pub horizon_steps: usize,
    pub sum_min_ade: f64,
    pub sum_min_fde: f64,
    pub min_ade: f64,
    pub min_fde: f64,
    pub min_jade: f64,
    pub min_jfde: f64,
    pub jade_k: usize,
    pub collisions: usize,
    pub cr_trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SceneOutcome {
    Evaluated(SceneMetrics),
    Skipped(String),
}

pub fn evaluate_scene(gt: &SceneFile, pred: &PredictionSet, cfg: &EvalConfig) -> Result<SceneOutcome, MetricsError> {
    pred.validate()?;
    let scene = &pred.header.scene;
    let k = cfg.k.unwrap_or(pred.header.k);
    if k == 0 {
        return Err(MetricsError::NoSamples);
    }
    if k > pred.header.k {
        return Ok(SceneOutcome::Skipped(format!(
            "{scene}: {k} samples requested, file has {}",
            pred.header.k
        )));
    }
    let horizon = cfg.horizon_steps.unwrap_or(pred.header.horizon_steps);
    if horizon == 0 {
        return Err(MetricsError::InvalidPrediction("horizon must be positive".into()));
    }
    if horizon > pred.header.horizon_steps {
        return Ok(SceneOutcome::Skipped(format!(
            "{scene}: horizon {horizon} requested, file predicts {}",
            pred.header.horizon_steps
        )));
    }
    let gt = at_rate(gt, pred.header.rate_hz)?;
    let window = match eval_window(&gt, cfg.history_steps, horizon) {
        Ok(w) => w,
        Err(MetricsError::Window { need, have }) => {
            return Ok(SceneOutcome::Skipped(format!(
                "{scene}: needs {need} ground-truth frames at {} Hz, has {have}",
                pred.header.rate_hz
            )))
        }
        Err(e) => return Err(e),
    };

    let mut preds = Vec::new();
    let mut gts = Vec::new();
    let mut shapes = Vec::new();
    for (id, samples) in &pred.agents {
        let i = window.ids.iter().position(|x| x == id).ok_or_else(|| MetricsError::UnknownAgent {
            scene: scene.clone(),
            id: *id,
        })?;
        preds.push(samples[..k].iter().map(|s| s[..horizon].to_vec()).collect::<Vec<_>>());
        gts.push(window.future[i].clone());
        shapes.push(window.shapes[i]);
    }

    let n = preds.len();
    let (mut sum_min_ade, mut sum_min_fde) = (0.0, 0.0);
    for (p, g) in preds.iter().zip(&gts) {
        let m = min_marginal(p, g)?;
        sum_min_ade += m.min_ade;
        sum_min_fde += m.min_fde;
    }
    let joint = min_joint(&preds, &gts)?;
    let hits = collision_indicators(&preds, &shapes)?;
    let (collisions, cr_trials) = match cfg.cr_mode {
        CrMode::All => (hits.iter().flatten().filter(|h| **h).count(), n * k),
        CrMode::Best => (hits.iter().filter(|h| h[joint.jade_k]).count(), n),
    };
    Ok(SceneOutcome::Evaluated(SceneMetrics {
        scene: scene.clone(),
        agents: n,
        k,
        horizon_steps: horizon,
        sum_min_ade,
        sum_min_fde,
        min_ade: sum_min_ade / n as f64,
        min_fde: sum_min_fde / n as f64,
        min_jade: joint.min_jade,
        min_jfde: joint.min_jfde,
        jade_k: joint.jade_k,
        collisions,
        cr_trials,
    }))
}

/// Corpus aggregates. Displacement errors are agent-weighted means; the
/// collision rate is the fraction of colliding (agent, sample) pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub scenes: usize,
    pub agents: usize,
    pub skipped: usize,
    #[serde(rename = "minADE")]
    pub min_ade: f64,
    #[serde(rename = "minFDE")]
    pub min_fde: f64,
    #[serde(rename = "minJADE")]
    pub min_jade: f64,
    #[serde(rename = "minJFDE")]
    pub min_jfde: f64,
    #[serde(rename = "CR_mean")]
    pub cr_mean: f64,
    pub cr_mode: CrMode,
}

impl MetricsReport {
    pub fn to_text(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_table(&self) -> String {
        format!(
            "{:>7} {:>7} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}\n{:>7} {:>7} {:>8} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4}\n",
            "scenes", "agents", "skipped", "minADE", "minFDE", "minJADE", "minJFDE", "CR mean",
            self.scenes, self.agents, self.skipped, self.min_ade, self.min_fde, self.min_jade, self.min_jfde, self.cr_mean
        )
    }
}

pub fn aggregate(scenes: &[SceneMetrics], skipped: usize, cr_mode: CrMode) -> MetricsReport {
    let agents: usize = scenes.iter().map(|s| s.agents).sum();
    let trials: usize = scenes.iter().map(|s| s.cr_trials).sum();
    let per_agent = |f: &dyn Fn(&SceneMetrics) -> f64| {
        if agents == 0 {
            0.0
        } else {
            scenes.iter().map(f).sum::<f64>() / agents as f64
        }
    };
    MetricsReport {
        scenes: scenes.len(),
        agents,
        skipped,
        min_ade: per_agent(&|s| s.sum_min_ade),
        min_fde: per_agent(&|s| s.sum_min_fde),
        min_jade: per_agent(&|s| s.min_jade * s.agents as f64),
        min_jfde: per_agent(&|s| s.min_jfde * s.agents as f64),
        cr_mean: if trials == 0 {
            0.0
        } else {
            scenes.iter().map(|s| s.collisions).sum::<usize>() as f64 / trials as f64
        },
        cr_mode,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub report: MetricsReport,
    pub scenes: Vec<SceneMetrics>,
    /// `(scene, reason)` for every skipped scene.
    pub skipped: Vec<(String, String)>,
}

/// Score every prediction set against its ground-truth scene, in scene id
/// order. Fails if a prediction names an unknown scene or agent, or if no
/// scene could be scored.
pub fn evaluate_corpus(
    gts: &BTreeMap<String, SceneFile>,
    preds: &[PredictionSet],
    cfg: &EvalConfig,
) -> Result<Evaluation, MetricsError> {
    let mut by_scene: BTreeMap<&str, &PredictionSet> = BTreeMap::new();
    for p in preds {
        if by_scene.insert(&p.header.scene, p).is_some() {
            return Err(MetricsError::DuplicateScene(p.header.scene.clone()));
        }
    }
    let mut scenes = Vec::new();
    let mut skipped = Vec::new();
    for (id, pred) in by_scene {
        let gt = gts.get(id).ok_or_else(|| MetricsError::UnknownScene(id.to_string()))?;
        match evaluate_scene(gt, pred, cfg)? {
            SceneOutcome::Evaluated(m) => scenes.push(m),
            SceneOutcome::Skipped(reason) => skipped.push((id.to_string(), reason)),
        }
    }
    if scenes.is_empty() {
        return Err(MetricsError::NothingEvaluated { skipped: skipped.len() });
    }
    Ok(Evaluation {
        report: aggregate(&scenes, skipped.len(), cfg.cr_mode),
        scenes,
        skipped,
    })
}

/// Seed of one agent's baseline samples.
pub fn agent_seed(seed: u64, id: AgentId) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ id as u64
}

/// Constant-velocity predictions for every agent of `scene`, from its first
/// `history_steps` frames at 2 Hz.
pub fn baseline_predictions(
    id: &str,
    scene: &SceneFile,
    history_steps: usize,
    horizon_steps: usize,
    k: usize,
    seed: u64,
) -> Result<PredictionSet, MetricsError> {
    let scene = at_rate(scene, EVAL_RATE_HZ)?;
    let w = eval_window(&scene, history_steps, 0)?;
    let mut agents = BTreeMap::new();
    for (aid, hist) in w.ids.iter().zip(&w.history) {
        agents.insert(*aid, constant_velocity_baseline(hist, horizon_steps, k, agent_seed(seed, *aid))?);
    }
    Ok(PredictionSet {
        header: PredictionHeader {
            scene: id.to_string(),
            rate_hz: EVAL_RATE_HZ,
            horizon_steps,
            k,
        },
        agents,
    })
}

/// The ground-truth future as a single-sample prediction.
pub fn ground_truth_predictions(
    id: &str,
    scene: &SceneFile,
    history_steps: usize,
    horizon_steps: usize,
) -> Result<PredictionSet, MetricsError> {
    let scene = at_rate(scene, EVAL_RATE_HZ)?;
    let w = eval_window(&scene, history_steps, horizon_steps)?;
    Ok(PredictionSet {
        header: PredictionHeader {
            scene: id.to_string(),
            rate_hz: EVAL_RATE_HZ,
            horizon_steps,
            k: 1,
        },
        agents: w.ids.into_iter().zip(w.future).map(|(a, f)| (a, vec![f])).collect(),
    })
}
