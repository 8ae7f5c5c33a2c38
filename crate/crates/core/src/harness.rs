//! Benchmark driver: scenario sweeps, persistence, summary tables and the
//! reward-by-interaction-offset analysis.
//!
//! Results layout in the output directory:
//!
//! * `{substrate}_sc{N}_seed{S}.jsonl`: one [`LogRecord`] per line, header
//!   first and summary last. Written to a temporary file and renamed, so a
//!   file that exists is complete.
//! * `{substrate}_sc{N}_seed{S}.cassette.jsonl`: recorded backend exchanges
//!   for remote runs, used by replay.
//! * `summary.json`: the [`SummaryTable`].

use crate::agents::{scenario_controllers, AgentSpec};
use crate::bots::ScenarioCatalog;
use crate::error::{HmError, Result};
use crate::game::{own_interaction, run_episode, EpisodeConfig, EpisodeResult, LogRecord, PlayerId, DEFAULT_MAX_STEPS};
use crate::reasoner::{Cassette, CassetteMode, CassetteReasoner, OracleReasoner, Reasoner, RemoteConfig, RemoteReasoner};
use crate::substrate::SubstrateId;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::{mpsc, Arc, Mutex};

/// Episode rewards are reported per this many steps.
pub const NORMALIZE_STEPS: f64 = 1200.0;
pub const BOOTSTRAP_RESAMPLES: usize = 1000;
const BOOTSTRAP_SEED: u64 = 0x0ff5e7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendConfig {
    Oracle,
    /// Remote chat completions; every exchange is recorded to the episode's
    /// cassette file.
    Remote(RemoteConfig),
    /// Answers only from previously recorded cassettes.
    Replay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    /// Seeds `0..n`.
    Count(u64),
    List(Vec<u64>),
}

impl Seeds {
    pub fn list(&self) -> Vec<u64> {
        match self {
            Seeds::Count(n) => (0..*n).collect(),
            Seeds::List(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub substrate: SubstrateId,
    pub scenarios: Vec<u32>,
    pub agent: AgentSpec,
    pub backend: BackendConfig,
    pub seeds: Seeds,
    pub max_steps: u64,
    pub out_dir: PathBuf,
    /// Worker threads; 0 picks the available parallelism.
    pub workers: usize,
}

impl RunConfig {
    pub fn new(substrate: SubstrateId, scenarios: Vec<u32>, agent: AgentSpec, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            substrate,
            scenarios,
            agent,
            backend: BackendConfig::Oracle,
            seeds: Seeds::Count(5),
            max_steps: DEFAULT_MAX_STEPS,
            out_dir: out_dir.into(),
            workers: 0,
        }
    }

    /// Checks scenarios against the catalog and basic ranges.
    pub fn validate(&self) -> Result<()> {
        let catalog = ScenarioCatalog::builtin();
        for s in &self.scenarios {
            catalog.get(self.substrate, *s)?;
        }
        if self.scenarios.is_empty() {
            return Err(HmError::Config("no scenarios selected".into()));
        }
        if self.seeds.list().is_empty() {
            return Err(HmError::Config("no seeds selected".into()));
        }
        if self.max_steps == 0 {
            return Err(HmError::Config("max_steps must be positive".into()));
        }
        Ok(())
    }

    pub fn episode_configs(&self) -> Vec<EpisodeConfig> {
        let seeds = self.seeds.list();
        self.scenarios
            .iter()
            .flat_map(|sc| {
                seeds.iter().map(move |seed| EpisodeConfig {
                    substrate: self.substrate,
                    scenario: *sc,
                    seed: *seed,
                    max_steps: self.max_steps,
                })
            })
            .collect()
    }
}

pub fn episode_stem(config: &EpisodeConfig) -> String {
    format!("{}_sc{}_seed{}", config.substrate, config.scenario, config.seed)
}

pub fn episode_path(dir: &Path, config: &EpisodeConfig) -> PathBuf {
    dir.join(format!("{}.jsonl", episode_stem(config)))
}

pub fn cassette_path(dir: &Path, config: &EpisodeConfig) -> PathBuf {
    dir.join(format!("{}.cassette.jsonl", episode_stem(config)))
}

/// Short agent label used in tables.
pub fn agent_label(spec: &AgentSpec) -> String {
    let kind = serde_json::to_value(spec.kind).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
    let mode = serde_json::to_value(spec.tom_mode).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
    match spec.kind {
        crate::agents::AgentKind::HypotheticalMinds => format!("{kind}/{mode}"),
        _ => kind,
    }
}

fn shared_backend(config: &RunConfig) -> Result<Option<Arc<dyn Reasoner>>> {
    Ok(match &config.backend {
        BackendConfig::Oracle => Some(Arc::new(OracleReasoner)),
        BackendConfig::Remote(rc) => Some(Arc::new(RemoteReasoner::from_env(rc.clone())?)),
        BackendConfig::Replay => None,
    })
}

/// The backend for one episode: the oracle as is, anything else through the
/// episode's cassette.
fn episode_backend(config: &RunConfig, shared: &Option<Arc<dyn Reasoner>>, ep: &EpisodeConfig) -> Result<Arc<dyn Reasoner>> {
    let path = cassette_path(&config.out_dir, ep);
    Ok(match (&config.backend, shared) {
        (BackendConfig::Oracle, Some(r)) => Arc::clone(r),
        (BackendConfig::Remote(_), Some(r)) => {
            // a fresh recording per attempt
            let _ = std::fs::remove_file(&path);
            Arc::new(CassetteReasoner::new(Some(Arc::clone(r)), Cassette::open(&path, CassetteMode::Record)?))
        }
        _ => Arc::new(CassetteReasoner::new(None, Cassette::open(&path, CassetteMode::Replay)?)),
    })
}

/// Runs one episode; a backend that cannot even be set up yields a failed
/// result rather than an error.
pub fn run_one(config: &RunConfig, backend: Arc<dyn Reasoner>, ep: &EpisodeConfig) -> Result<EpisodeResult> {
    let mut controllers = scenario_controllers(&config.agent, ep, backend)?;
    run_episode(ep, &mut controllers)
}

fn failed_result(ep: &EpisodeConfig, message: String) -> EpisodeResult {
    let records = vec![
        LogRecord::Header { schema_version: crate::game::RESULTS_SCHEMA_VERSION, config: ep.clone(), controllers: vec![], parameters: vec![] },
        LogRecord::Failure { step: 0, message: message.clone() },
        LogRecord::Summary { steps: 0, total_rewards: vec![], interactions: 0, deliveries: 0, failed: true },
    ];
    EpisodeResult { config: ep.clone(), records, total_rewards: vec![], steps: 0, failure: Some(message) }
}

fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let tmp = path.with_extension("jsonl.tmp");
    std::fs::write(&tmp, text)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// A finished episode on disk that does not need re-running. Failed
/// episodes are run again on resume.
fn completed(path: &Path) -> Option<EpisodeResult> {
    let text = std::fs::read_to_string(path).ok()?;
    EpisodeResult::from_jsonl(&text).ok().filter(|r| r.failure.is_none())
}

pub struct SuiteOutcome {
    pub table: SummaryTable,
    pub results: Vec<EpisodeResult>,
    /// Episodes actually executed in this call (the rest were resumed).
    pub executed: usize,
}

/// Runs every (scenario, seed) episode of `config`, skipping ones already
/// completed in the output directory, and writes `summary.json`.
pub fn run_suite(config: &RunConfig) -> Result<SuiteOutcome> {
    config.validate()?;
    std::fs::create_dir_all(&config.out_dir)?;
    let shared = shared_backend(config)?;

    let mut done: BTreeMap<String, EpisodeResult> = BTreeMap::new();
    let mut todo = VecDeque::new();
    for ep in config.episode_configs() {
        match completed(&episode_path(&config.out_dir, &ep)) {
            Some(r) if r.config == ep => {
                done.insert(episode_stem(&ep), r);
            }
            _ => todo.push_back(ep),
        }
    }
    let executed = todo.len();
    let workers = match config.workers {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        n => n,
    }
    .min(todo.len().max(1));
    log::info!("running {executed} episodes on {workers} workers ({} resumed)", done.len());

    let queue = Mutex::new(todo);
    let (tx, rx) = mpsc::channel::<EpisodeResult>();
    let mut write_error = None;
    std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let (queue, shared) = (&queue, &shared);
            scope.spawn(move || loop {
                let Some(ep) = queue.lock().expect("queue lock").pop_front() else { break };
                let result = episode_backend(config, shared, &ep)
                    .and_then(|b| run_one(config, b, &ep))
                    .unwrap_or_else(|e| failed_result(&ep, e.to_string()));
                if tx.send(result).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        // the single writer
        for result in rx {
            if let Some(f) = &result.failure {
                log::warn!("{} failed: {f}", episode_stem(&result.config));
            }
            if write_error.is_none() {
                if let Err(e) = write_atomic(&episode_path(&config.out_dir, &result.config), &result.to_jsonl()) {
                    write_error = Some(e);
                }
            }
            done.insert(episode_stem(&result.config), result);
        }
    });
    if let Some(e) = write_error {
        return Err(e);
    }

    let mut results: Vec<EpisodeResult> = done.into_values().collect();
    results.sort_by_key(|r| (r.config.scenario, r.config.seed));
    let table = SummaryTable::from_results(&results, &agent_label(&config.agent));
    std::fs::write(config.out_dir.join("summary.json"), serde_json::to_string_pretty(&table)?)?;
    Ok(SuiteOutcome { table, results, executed })
}

/// Loads every episode file in a directory.
pub fn load_results(dir: &Path) -> Result<Vec<EpisodeResult>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            name.ends_with(".jsonl") && !name.ends_with(".cassette.jsonl")
        })
        .collect();
    paths.sort();
    paths.iter().map(|p| EpisodeResult::from_jsonl(&std::fs::read_to_string(p)?)).collect()
}

// ---------------------------------------------------------------- summary

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub substrate: SubstrateId,
    pub scenario: u32,
    pub agent: String,
    /// Completed episodes in the mean.
    pub episodes: usize,
    pub failed: usize,
    /// Mean focal reward per episode, normalized per 1200 steps.
    pub mean: f64,
    /// Standard error of the mean over episodes.
    pub sem: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub schema_version: u32,
    pub rows: Vec<SummaryRow>,
}

/// Focal reward of a finished episode scaled to 1200 steps.
pub fn normalized_reward(r: &EpisodeResult) -> Option<f64> {
    if r.failure.is_some() || r.steps == 0 {
        return None;
    }
    Some(r.total_rewards.first().copied().unwrap_or(0.0) * NORMALIZE_STEPS / r.steps as f64)
}

pub fn mean_sem(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

impl SummaryTable {
    pub fn from_results(results: &[EpisodeResult], agent: &str) -> Self {
        let mut groups: BTreeMap<(String, u32), (SubstrateId, Vec<f64>, usize)> = BTreeMap::new();
        for r in results {
            let g = groups.entry((r.config.substrate.to_string(), r.config.scenario)).or_insert((r.config.substrate, vec![], 0));
            match normalized_reward(r) {
                Some(x) => g.1.push(x),
                None => g.2 += 1,
            }
        }
        let rows = groups
            .into_iter()
            .map(|((_, scenario), (substrate, xs, failed))| {
                let (mean, sem) = mean_sem(&xs);
                SummaryRow { substrate, scenario, agent: agent.to_string(), episodes: xs.len(), failed, mean, sem }
            })
            .collect();
        Self { schema_version: crate::game::RESULTS_SCHEMA_VERSION, rows }
    }
}

impl fmt::Display for SummaryTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<14} {:>8} {:<28} {:>8} {:>6} {:>10} {:>8}", "substrate", "scenario", "agent", "episodes", "failed", "mean", "sem")?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<14} {:>8} {:<28} {:>8} {:>6} {:>10.3} {:>8.3}",
                r.substrate.to_string(),
                r.scenario,
                r.agent,
                r.episodes,
                r.failed,
                r.mean,
                r.sem
            )?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------- offset analysis

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffsetPoint {
    /// Interaction index minus the validating interaction's index.
    pub offset: i64,
    pub n: usize,
    pub mean: f64,
    /// Bootstrap 95% band of the mean.
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffsetCurve {
    pub points: Vec<OffsetPoint>,
    pub episodes_used: usize,
    /// Episodes that never validated a hypothesis.
    pub excluded: usize,
    /// Mean reward per interaction at offsets <= 0 and > 0.
    pub pre_mean: Option<f64>,
    pub post_mean: Option<f64>,
}

/// Number of interactions the player had when a hypothesis first reached
/// the validation threshold.
pub fn first_validation(result: &EpisodeResult, player: PlayerId) -> Option<usize> {
    result.records.iter().find_map(|r| match r {
        LogRecord::Tom { player: p, snapshot, .. } if *p == player && snapshot["bank"]["validated"] == true => {
            snapshot["round"].as_u64().map(|n| n as usize)
        }
        _ => None,
    })
}

/// The player's reward in each of its interactions, in order.
pub fn interaction_rewards(result: &EpisodeResult, player: PlayerId) -> Vec<f64> {
    result.events().filter_map(|(_, e)| own_interaction(e, player)).map(|o| o.reward).collect()
}

/// Aligns every episode at its first validation. The validating interaction
/// is offset 0, the next one +1, the previous one -1.
pub fn interaction_offset_analysis(results: &[EpisodeResult], player: PlayerId) -> OffsetCurve {
    let mut by_offset: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
    let (mut used, mut excluded) = (0, 0);
    for r in results.iter().filter(|r| r.failure.is_none()) {
        let Some(v) = first_validation(r, player) else {
            excluded += 1;
            continue;
        };
        used += 1;
        for (i, x) in interaction_rewards(r, player).into_iter().enumerate() {
            by_offset.entry(i as i64 + 1 - v as i64).or_default().push(x);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(BOOTSTRAP_SEED);
    let points = by_offset
        .iter()
        .map(|(offset, xs)| {
            let (lo, hi) = bootstrap_band(xs, &mut rng);
            OffsetPoint { offset: *offset, n: xs.len(), mean: xs.iter().sum::<f64>() / xs.len() as f64, lo, hi }
        })
        .collect();
    let pooled = |keep: fn(i64) -> bool| {
        let xs: Vec<f64> = by_offset.iter().filter(|(o, _)| keep(**o)).flat_map(|(_, v)| v.iter().copied()).collect();
        (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
    };
    OffsetCurve { points, episodes_used: used, excluded, pre_mean: pooled(|o| o <= 0), post_mean: pooled(|o| o > 0) }
}

/// Percentile bootstrap of the mean (2.5% and 97.5%).
fn bootstrap_band(xs: &[f64], rng: &mut ChaCha8Rng) -> (f64, f64) {
    if xs.len() < 2 {
        let m = xs.first().copied().unwrap_or(0.0);
        return (m, m);
    }
    let mut means: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| (0..xs.len()).map(|_| xs[rng.gen_range(0..xs.len())]).sum::<f64>() / xs.len() as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let at = |q: f64| means[((q * (means.len() - 1) as f64).round() as usize).min(means.len() - 1)];
    (at(0.025), at(0.975))
}

// ---------------------------------------------------------------- replay

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayReport {
    pub identical: bool,
    /// First differing record (0-based line), if any.
    pub first_difference: Option<usize>,
    pub records: usize,
}

fn header_spec(result: &EpisodeResult) -> Result<(AgentSpec, String)> {
    let params = match result.records.first() {
        Some(LogRecord::Header { parameters, .. }) => parameters.first().cloned(),
        _ => None,
    }
    .ok_or_else(|| HmError::Config("results file has no agent parameters".into()))?;
    let spec: AgentSpec = serde_json::from_value(params["agent"].clone())?;
    let backend = params["backend"].as_str().unwrap_or("").to_string();
    Ok((spec, backend))
}

/// Table label of the agent that produced a results file.
pub fn result_agent_label(result: &EpisodeResult) -> Option<String> {
    header_spec(result).ok().map(|(spec, _)| agent_label(&spec))
}

/// Latency and retry counts depend on the network, not on the episode. The
/// backend name differs too: a replaying cassette has no inner backend.
fn without_timing(records: &[LogRecord]) -> Vec<String> {
    records
        .iter()
        .map(|r| {
            let mut r = r.clone();
            match &mut r {
                LogRecord::Trace { trace, .. } => {
                    trace.latency_ms = 0;
                    trace.retries = 0;
                }
                LogRecord::Header { parameters, .. } => {
                    for p in parameters.iter_mut().filter(|p| p.get("backend").is_some()) {
                        p["backend"] = serde_json::Value::Null;
                    }
                }
                _ => {}
            }
            serde_json::to_string(&r).expect("records serialize")
        })
        .collect()
}

/// Re-runs a recorded episode. Oracle episodes must match byte for byte;
/// recorded remote episodes are answered from their cassette and compared
/// without timing fields.
pub fn replay_file(path: &Path) -> Result<ReplayReport> {
    let text = std::fs::read_to_string(path)?;
    let original = EpisodeResult::from_jsonl(&text)?;
    let (spec, backend) = header_spec(&original)?;
    let oracle = backend == OracleReasoner.name();
    let reasoner: Arc<dyn Reasoner> = if oracle {
        Arc::new(OracleReasoner)
    } else {
        let dir = path.parent().unwrap_or(Path::new("."));
        Arc::new(CassetteReasoner::new(None, Cassette::open(cassette_path(dir, &original.config), CassetteMode::Replay)?))
    };
    let mut controllers = scenario_controllers(&spec, &original.config, reasoner)?;
    let replayed = run_episode(&original.config, &mut controllers)?;
    let (a, b) = if oracle {
        (text.lines().map(str::to_string).collect::<Vec<_>>(), replayed.to_jsonl().lines().map(str::to_string).collect())
    } else {
        (without_timing(&original.records), without_timing(&replayed.records))
    };
    let first_difference = (0..a.len().max(b.len())).find(|i| a.get(*i) != b.get(*i));
    Ok(ReplayReport { identical: first_difference.is_none(), first_difference, records: a.len() })
}

// ---------------------------------------------------------------- plots

/// Line chart of the offset curve with its bootstrap band, as SVG.
pub fn offset_curve_svg(curve: &OffsetCurve) -> String {
    let (w, h, pad) = (640.0, 360.0, 40.0);
    if curve.points.is_empty() {
        return format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\"></svg>\n");
    }
    let (x0, x1) = (curve.points[0].offset as f64, curve.points[curve.points.len() - 1].offset as f64);
    let lo = curve.points.iter().map(|p| p.lo).fold(f64::INFINITY, f64::min).min(0.0);
    let hi = curve.points.iter().map(|p| p.hi).fold(f64::NEG_INFINITY, f64::max).max(0.0);
    let sx = |x: f64| pad + (x - x0) / (x1 - x0).max(1.0) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - lo) / (hi - lo).max(1e-9) * (h - 2.0 * pad);
    let line = |f: fn(&OffsetPoint) -> f64| {
        curve.points.iter().map(|p| format!("{:.1},{:.1}", sx(p.offset as f64), sy(f(p)))).collect::<Vec<_>>().join(" ")
    };
    let band: Vec<String> = curve
        .points
        .iter()
        .map(|p| format!("{:.1},{:.1}", sx(p.offset as f64), sy(p.hi)))
        .chain(curve.points.iter().rev().map(|p| format!("{:.1},{:.1}", sx(p.offset as f64), sy(p.lo))))
        .collect();
    let mut s = format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\">\n");
    s += &format!("<polygon points=\"{}\" fill=\"#9ecae1\" opacity=\"0.5\"/>\n", band.join(" "));
    s += &format!("<polyline points=\"{}\" fill=\"none\" stroke=\"#08519c\" stroke-width=\"2\"/>\n", line(|p| p.mean));
    s += &format!(
        "<line x1=\"{:.1}\" y1=\"{pad}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#444\" stroke-dasharray=\"4\"/>\n",
        sx(0.0),
        sx(0.0),
        h - pad
    );
    s += &format!("<line x1=\"{pad}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#999\"/>\n", sy(0.0), w - pad, sy(0.0));
    s += &format!("<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\">interactions relative to validation</text>\n", w / 2.0 - 90.0, h - 8.0);
    s += "</svg>\n";
    s
}

/// Bar chart of table means with SEM whiskers, as SVG.
pub fn summary_svg(table: &SummaryTable) -> String {
    let (w, h, pad) = (640.0, 360.0, 40.0);
    let n = table.rows.len().max(1) as f64;
    let lo = table.rows.iter().map(|r| r.mean - r.sem).fold(0.0, f64::min);
    let hi = table.rows.iter().map(|r| r.mean + r.sem).fold(0.0, f64::max);
    let sy = |y: f64| h - pad - (y - lo) / (hi - lo).max(1e-9) * (h - 2.0 * pad);
    let bw = (w - 2.0 * pad) / n;
    let mut s = format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\">\n");
    for (i, r) in table.rows.iter().enumerate() {
        let x = pad + i as f64 * bw;
        let (top, bottom) = (sy(r.mean.max(0.0)), sy(r.mean.min(0.0)));
        s += &format!(
            "<rect x=\"{:.1}\" y=\"{top:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"#6baed6\"/>\n",
            x + bw * 0.15,
            bw * 0.7,
            bottom - top
        );
        let cx = x + bw / 2.0;
        s += &format!(
            "<line x1=\"{cx:.1}\" y1=\"{:.1}\" x2=\"{cx:.1}\" y2=\"{:.1}\" stroke=\"#222\"/>\n",
            sy(r.mean - r.sem),
            sy(r.mean + r.sem)
        );
        s += &format!("<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\">{}</text>\n", cx - 10.0, h - pad + 14.0, r.scenario);
    }
    s += &format!("<line x1=\"{pad}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#999\"/>\n", sy(0.0), w - pad, sy(0.0));
    s += "</svg>\n";
    s
}
