use std::collections::BTreeMap;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use pedsim_core::metrics::{
    baseline_predictions, evaluate_corpus, filter_interactive, ground_truth_predictions, read_predictions, scene_id,
    write_predictions, CrMode, EvalConfig, MetricsError, PredictionSet, DEFAULT_FILTER_DIST, DEFAULT_FILTER_MIN_SPEED,
    DEFAULT_HISTORY_STEPS, DEFAULT_HORIZON_STEPS, DEFAULT_K, PRED_EXT,
};
use pedsim_core::recorder::{corpus_stats, read_scene, resample_scene, write_scene, RecorderError, SceneFile, SCENE_EXT};
use pedsim_core::runner::{ensure_writable, run_batch, PedestrianSource, RunConfig, RunError, ScenarioSource};
use pedsim_core::scenarios::rasterize_semantic_map;
use pedsim_server::ServerConfig;

const EXIT_CONFIG: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_SKIP_ALL: u8 = 4;

/// An error with the exit status it maps to.
struct Fail {
    code: u8,
    err: anyhow::Error,
}

fn config(err: impl Into<anyhow::Error>) -> Fail {
    Fail { code: EXIT_CONFIG, err: err.into() }
}

fn invalid(err: impl Into<anyhow::Error>) -> Fail {
    Fail { code: EXIT_VALIDATION, err: err.into() }
}

impl From<RunError> for Fail {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Scenario(_) | RunError::Io { .. } => config(e),
            _ => invalid(e),
        }
    }
}

impl From<MetricsError> for Fail {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::NothingEvaluated { .. } => Fail { code: EXIT_SKIP_ALL, err: e.into() },
            _ => invalid(e),
        }
    }
}

type Result<T> = std::result::Result<T, Fail>;

#[derive(Parser)]
#[command(name = "pedsim", version, about = "Pedestrian-vehicle interaction simulator, recorder and evaluator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate scenes headlessly and write scene + replay files.
    Run {
        /// Built-in scenario id or scenario file.
        #[arg(long, default_value = "jaywalk")]
        scenario: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Scenes to generate, at seeds seed, seed+1, ...
        #[arg(long, default_value_t = 1)]
        count: u32,
        #[arg(long, default_value = "scenes")]
        out: PathBuf,
        /// Re-simulate a recorded session from its replay log.
        #[arg(long)]
        pedestrian_replay: Option<PathBuf>,
    },
    /// Serve live sessions over HTTP and WebSocket.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value = "scenes")]
        out: PathBuf,
        /// Scenario for sessions created without one.
        #[arg(long, default_value = "jaywalk")]
        scenario: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory of web client files served at /.
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 50)]
        tick_ms: u64,
    },
    /// Decimate scenes to a lower rate.
    Resample {
        #[arg(long)]
        to_hz: u32,
        /// Scene file or directory.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// List scenes with a pedestrian near a moving car.
    Filter {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_FILTER_DIST)]
        dist: f64,
        #[arg(long, default_value_t = DEFAULT_FILTER_MIN_SPEED)]
        min_speed: f64,
        /// Copy the kept scene files here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score prediction files against ground-truth scenes.
    Eval {
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        /// Use only the first K samples of each prediction file.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_HISTORY_STEPS)]
        history_steps: usize,
        /// Defaults to each prediction file's horizon.
        #[arg(long)]
        horizon_steps: Option<usize>,
        #[arg(long, default_value = "all")]
        cr_mode: CrMode,
        /// Report file; defaults to metrics.json in the prediction directory.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Write prediction files from a reference predictor.
    Predict {
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Model::Cv)]
        model: Model,
        #[arg(long, default_value_t = DEFAULT_K)]
        k: usize,
        #[arg(long, default_value_t = DEFAULT_HISTORY_STEPS)]
        history_steps: usize,
        #[arg(long, default_value_t = DEFAULT_HORIZON_STEPS)]
        horizon_steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Rasterize a scenario map to a PGM image.
    Map {
        #[arg(long, default_value = "jaywalk")]
        scenario: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Meters per cell.
        #[arg(long, default_value_t = 0.1)]
        resolution: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check scene files against the schema.
    Validate { paths: Vec<PathBuf> },
    /// Corpus counts for a scene directory.
    Stats { input: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    /// Constant velocity with spread headings.
    Cv,
    /// The ground-truth future, one sample.
    Gt,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Run { scenario, seed, count, out, pedestrian_replay } => run(scenario, seed, count, out, pedestrian_replay),
        Cmd::Serve { port, host, out, scenario, seed, static_dir, tick_ms } => {
            serve(port, host, out, scenario, seed, static_dir, tick_ms)
        }
        Cmd::Resample { to_hz, input, out } => resample(to_hz, &input, &out),
        Cmd::Filter { input, dist, min_speed, out } => filter(&input, dist, min_speed, out.as_deref()),
        Cmd::Eval { gt, pred, k, history_steps, horizon_steps, cr_mode, report } => {
            let cfg = EvalConfig { history_steps, horizon_steps, k, cr_mode };
            eval(&gt, &pred, &cfg, report)
        }
        Cmd::Predict { gt, out, model, k, history_steps, horizon_steps, seed } => {
            predict(&gt, &out, model, k, history_steps, horizon_steps, seed)
        }
        Cmd::Map { scenario, seed, resolution, out } => map(&scenario, seed, resolution, &out),
        Cmd::Validate { paths } => validate(&paths),
        Cmd::Stats { input } => stats(&input),
    }
}

fn run(scenario: String, seed: u64, count: u32, out: PathBuf, replay: Option<PathBuf>) -> Result<()> {
    if count == 0 {
        return Err(config(anyhow!("--count must be at least 1")));
    }
    let cfg = RunConfig {
        scenario: ScenarioSource::parse(&scenario),
        seed,
        pedestrian: replay.map_or(PedestrianSource::Scripted, PedestrianSource::Replay),
        out_dir: out,
        count,
    };
    let written = run_batch(&cfg)?;
    println!("{:>8} {:>7} {:>9}  {:<10} scene", "seed", "frames", "seconds", "end");
    let mut frames = 0;
    for w in &written {
        let scene = match (&w.scene, &w.scene_error) {
            (Some(p), _) => p.display().to_string(),
            (None, Some(e)) => format!("rejected: {e}"),
            (None, None) => "rejected".into(),
        };
        let end = w.reason.as_deref().unwrap_or("-");
        println!("{:>8} {:>7} {:>9.2}  {:<10} {}", w.seed, w.frames, w.duration_s, end, scene);
        frames += w.frames;
    }
    let kept = written.iter().filter(|w| w.scene.is_some()).count();
    println!("{} scenes ({} kept), {} frames, {:.1} s", written.len(), kept, frames, frames as f64 * 0.05);
    Ok(())
}

fn serve(
    port: u16,
    host: String,
    out: PathBuf,
    scenario: String,
    seed: u64,
    static_dir: Option<PathBuf>,
    tick_ms: u64,
) -> Result<()> {
    pedsim_server::load_session_scenario(&scenario, seed).map_err(config)?;
    ensure_writable(&out)?;
    let addr: SocketAddr = format!("{host}:{port}").parse().map_err(config)?;
    let mut cfg = ServerConfig::new(out);
    cfg.scenario = scenario;
    cfg.seed = seed;
    cfg.static_dir = static_dir;
    cfg.tick = Duration::from_millis(tick_ms.max(1));
    let rt = tokio::runtime::Runtime::new().map_err(config)?;
    eprintln!("listening on http://{addr}");
    rt.block_on(pedsim_server::serve(cfg, addr)).map_err(config)
}

/// Scene files under `input`, sorted, or `input` itself.
fn scene_paths(input: &Path) -> Result<Vec<PathBuf>> {
    if input.is_file() {
        return Ok(vec![input.to_path_buf()]);
    }
    let entries = fs::read_dir(input).with_context(|| format!("{}", input.display())).map_err(config)?;
    let mut paths: Vec<PathBuf> = entries
        .flatten()
        .map(|e| e.path())
        .filter(|p| p.to_string_lossy().ends_with(SCENE_EXT))
        .collect();
    paths.sort();
    Ok(paths)
}

fn load_scene(path: &Path) -> Result<SceneFile> {
    let text = fs::read_to_string(path).with_context(|| format!("{}", path.display())).map_err(config)?;
    read_scene(&text).with_context(|| format!("{}", path.display())).map_err(invalid)
}

fn load_scenes(input: &Path) -> Result<Vec<(PathBuf, SceneFile)>> {
    scene_paths(input)?.into_iter().map(|p| load_scene(&p).map(|s| (p, s))).collect()
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("{}", path.display())).map_err(config)
}

fn resample(to_hz: u32, input: &Path, out: &Path) -> Result<()> {
    let scenes = load_scenes(input)?;
    ensure_writable(out)?;
    for (path, scene) in &scenes {
        let down = resample_scene(scene, to_hz).map_err(|e| match e {
            RecorderError::Resample { .. } | RecorderError::UnsupportedRate(_) => config(e),
            e => invalid(e),
        })?;
        write_file(&out.join(file_name(path)), &write_scene(&down))?;
    }
    println!("resampled {} scenes to {} Hz", scenes.len(), to_hz);
    Ok(())
}

fn filter(input: &Path, dist: f64, min_speed: f64, out: Option<&Path>) -> Result<()> {
    if !(dist >= 0.0 && min_speed >= 0.0) {
        return Err(config(anyhow!("--dist and --min-speed must be non-negative")));
    }
    let loaded = load_scenes(input)?;
    let (paths, scenes): (Vec<PathBuf>, Vec<SceneFile>) = loaded.into_iter().unzip();
    let kept = filter_interactive(&scenes, dist, min_speed);
    if let Some(out) = out {
        ensure_writable(out)?;
    }
    for &i in &kept {
        println!("{}", file_name(&paths[i]));
        if let Some(out) = out {
            fs::copy(&paths[i], out.join(file_name(&paths[i]))).map_err(config)?;
        }
    }
    eprintln!("{} of {} scenes interactive", kept.len(), scenes.len());
    Ok(())
}

fn eval(gt: &Path, pred: &Path, cfg: &EvalConfig, report: Option<PathBuf>) -> Result<()> {
    let mut gts = BTreeMap::new();
    for (path, scene) in load_scenes(gt)? {
        let id = scene_id(&scene.header);
        if gts.insert(id.clone(), scene).is_some() {
            return Err(invalid(anyhow!("{}: second scene with id {id}", path.display())));
        }
    }
    let mut preds = Vec::new();
    let entries = fs::read_dir(pred).with_context(|| format!("{}", pred.display())).map_err(config)?;
    let mut paths: Vec<PathBuf> = entries
        .flatten()
        .map(|e| e.path())
        .filter(|p| p.to_string_lossy().ends_with(PRED_EXT))
        .collect();
    paths.sort();
    for path in &paths {
        let text = fs::read_to_string(path).map_err(config)?;
        let set = read_predictions(&text).with_context(|| format!("{}", path.display())).map_err(invalid)?;
        preds.push(set);
    }
    let result = evaluate_corpus(&gts, &preds, cfg);
    if let Err(MetricsError::NothingEvaluated { skipped }) = &result {
        eprintln!("warning: all {skipped} scenes skipped");
    }
    let evaluation = result?;
    for (scene, reason) in &evaluation.skipped {
        eprintln!("warning: skipped {scene}: {reason}");
    }
    let report_path = report.unwrap_or_else(|| pred.join("metrics.json"));
    write_file(&report_path, &evaluation.report.to_text())?;
    print!("{}", evaluation.report.to_table());
    Ok(())
}

fn predict(gt: &Path, out: &Path, model: Model, k: usize, history: usize, horizon: usize, seed: u64) -> Result<()> {
    if k == 0 || history == 0 || horizon == 0 {
        return Err(config(anyhow!("--k, --history-steps and --horizon-steps must be positive")));
    }
    let scenes = load_scenes(gt)?;
    ensure_writable(out)?;
    for (_, scene) in &scenes {
        let id = scene_id(&scene.header);
        let set: PredictionSet = match model {
            Model::Cv => baseline_predictions(&id, scene, history, horizon, k, seed)?,
            Model::Gt => ground_truth_predictions(&id, scene, history, horizon)?,
        };
        write_file(&out.join(format!("{id}{PRED_EXT}")), &write_predictions(&set))?;
    }
    println!("wrote {} prediction files", scenes.len());
    Ok(())
}

fn map(scenario: &str, seed: u64, resolution: f64, out: &Path) -> Result<()> {
    let spec = ScenarioSource::parse(scenario).load(seed)?;
    let grid = rasterize_semantic_map(&spec.map, resolution).map_err(config)?;
    write_file(out, &grid.to_pgm())?;
    println!("{} x {} cells at {} m", grid.width, grid.height, resolution);
    Ok(())
}

fn validate(paths: &[PathBuf]) -> Result<()> {
    let mut bad = 0;
    let mut checked = 0;
    for input in paths {
        for path in scene_paths(input)? {
            checked += 1;
            match load_scene(&path) {
                Ok(_) => println!("ok      {}", path.display()),
                Err(f) => {
                    bad += 1;
                    println!("invalid {}: {:#}", path.display(), f.err);
                }
            }
        }
    }
    if bad > 0 {
        return Err(invalid(anyhow!("{bad} of {checked} scenes invalid")));
    }
    Ok(())
}

fn stats(input: &Path) -> Result<()> {
    let scenes: Vec<SceneFile> = load_scenes(input)?.into_iter().map(|(_, s)| s).collect();
    let s = corpus_stats(&scenes);
    println!("scenes           {}", s.scenes);
    println!("frames           {}", s.frames);
    println!("records          {}", s.records);
    println!("frames at 2 Hz   {}", s.frames_2hz);
    println!("mean duration s  {:.2}", s.mean_duration_s);
    Ok(())
}
