//! `hm`: run scenario sweeps, analyze results directories and replay
//! recorded episodes.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hm_core::agents::{AgentKind, AgentSpec};
use hm_core::game::{PlayerId, DEFAULT_MAX_STEPS};
use hm_core::harness::{
    self, agent_label, interaction_offset_analysis, load_results, replay_file, BackendConfig, RunConfig, Seeds, SummaryTable,
};
use hm_core::reasoner::RemoteConfig;
use hm_core::substrate::SubstrateId;
use hm_core::tom::{TomMode, TomParams};
use serde::Deserialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "hm", version, about = "Theory-of-mind agents on multi-agent grid worlds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)] // parsed once
enum Command {
    /// Run every (scenario, seed) episode and write results plus a summary.
    Run(RunArgs),
    /// Summarize a results directory and compute the offset curve.
    Analyze(AnalyzeArgs),
    /// Re-run recorded episodes and check they reproduce.
    Replay(ReplayArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Backend {
    Oracle,
    Remote,
    Replay,
}

#[derive(Args)]
struct RunArgs {
    /// TOML file; its values override the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "rws_repeated")]
    substrate: String,
    /// Scenario ids: a list ("0,3,5"), a range ("0-8") or "all".
    #[arg(long, default_value = "all")]
    scenarios: String,
    /// hm, react, reflexion or planreact.
    #[arg(long, default_value = "hm")]
    agent: String,
    /// modular, vanilla, counterfactual or disabled.
    #[arg(long, default_value = "modular")]
    tom_mode: String,
    /// Force plan evaluation and reflections on or off.
    #[arg(long)]
    reflect: Option<bool>,
    #[arg(long, value_enum, default_value = "oracle")]
    backend: Backend,
    /// Number of seeds (0..n).
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    /// Explicit seeds, overriding --seeds.
    #[arg(long, value_delimiter = ',')]
    seed_list: Option<Vec<u64>>,
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    max_steps: u64,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    model: Option<String>,
    /// Environment variable holding the remote credential.
    #[arg(long)]
    api_key_env: Option<String>,
    /// Also write summary.svg.
    #[arg(long)]
    plot: bool,
}

/// Config file contents. Every field is optional and wins over the flag.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    substrate: Option<String>,
    scenarios: Option<Vec<u32>>,
    agent: Option<String>,
    tom_mode: Option<String>,
    reflect: Option<bool>,
    tom_params: Option<TomParams>,
    backend: Option<String>,
    seeds: Option<u64>,
    seed_list: Option<Vec<u64>>,
    max_steps: Option<u64>,
    out: Option<PathBuf>,
    workers: Option<usize>,
    remote: Option<RemoteConfig>,
    temperature: Option<f64>,
    max_tokens: Option<u32>,
}

#[derive(Args)]
struct AnalyzeArgs {
    dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    player: usize,
    /// Write the offset curve as SVG here.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    /// Episode files, or directories of them.
    #[arg(required = true)]
    paths: Vec<PathBuf>,
}

fn parse_scenarios(s: &str, substrate: SubstrateId) -> Result<Vec<u32>> {
    if s == "all" {
        let catalog = hm_core::bots::ScenarioCatalog::builtin();
        return Ok((0..100).filter(|id| catalog.get(substrate, *id).is_ok()).collect());
    }
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => out.extend(a.parse::<u32>()?..=b.parse::<u32>()?),
            None => out.push(part.parse()?),
        }
    }
    Ok(out)
}

fn backend_kind(name: &str) -> Result<Backend> {
    Backend::from_str(name, true).map_err(|e| anyhow::anyhow!("backend {name:?}: {e}"))
}

fn build_config(args: &RunArgs) -> Result<(RunConfig, bool)> {
    let file: FileConfig = match &args.config {
        Some(p) => toml::from_str(&std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)
            .with_context(|| format!("parsing {}", p.display()))?,
        None => FileConfig::default(),
    };
    let substrate: SubstrateId = file.substrate.as_deref().unwrap_or(&args.substrate).parse()?;
    let scenarios = match file.scenarios {
        Some(v) => v,
        None => parse_scenarios(&args.scenarios, substrate)?,
    };
    let kind: AgentKind = file.agent.as_deref().unwrap_or(&args.agent).parse()?;
    let mut agent = AgentSpec::new(kind, substrate);
    agent.tom_mode = file.tom_mode.as_deref().unwrap_or(&args.tom_mode).parse::<TomMode>()?;
    if let Some(r) = file.reflect.or(args.reflect) {
        agent.reflect = r;
    }
    agent.tom_params = file.tom_params;
    if let Some(t) = file.temperature {
        agent.sampling.temperature = t;
    }
    if let Some(m) = file.max_tokens {
        agent.sampling.max_tokens = m;
    }
    let backend = match file.backend.as_deref().map(backend_kind).transpose()?.unwrap_or(args.backend) {
        Backend::Oracle => BackendConfig::Oracle,
        Backend::Replay => BackendConfig::Replay,
        Backend::Remote => {
            let mut rc = file.remote.unwrap_or_default();
            if let Some(e) = &args.endpoint {
                rc.endpoint.clone_from(e);
            }
            if let Some(m) = &args.model {
                rc.model.clone_from(m);
            }
            if let Some(k) = &args.api_key_env {
                rc.api_key_env.clone_from(k);
            }
            BackendConfig::Remote(rc)
        }
    };
    let seeds = match (file.seed_list, file.seeds, &args.seed_list) {
        (Some(l), _, _) => Seeds::List(l),
        (None, Some(n), _) => Seeds::Count(n),
        (None, None, Some(l)) => Seeds::List(l.clone()),
        (None, None, None) => Seeds::Count(args.seeds),
    };
    let config = RunConfig {
        substrate,
        scenarios,
        agent,
        backend,
        seeds,
        max_steps: file.max_steps.unwrap_or(args.max_steps),
        out_dir: file.out.unwrap_or_else(|| args.out.clone()),
        workers: file.workers.unwrap_or(args.workers),
    };
    config.validate()?;
    Ok((config, args.plot))
}

fn run(args: RunArgs) -> Result<ExitCode> {
    let (config, plot) = build_config(&args)?;
    log::info!("agent {} on {} scenarios {:?}", agent_label(&config.agent), config.substrate, config.scenarios);
    let outcome = harness::run_suite(&config)?;
    print!("{}", outcome.table);
    println!("{} episodes run, {} resumed; results in {}", outcome.executed, outcome.results.len() - outcome.executed, config.out_dir.display());
    if plot {
        std::fs::write(config.out_dir.join("summary.svg"), harness::summary_svg(&outcome.table))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn analyze(args: AnalyzeArgs) -> Result<ExitCode> {
    let results = load_results(&args.dir)?;
    if results.is_empty() {
        bail!("no episode files in {}", args.dir.display());
    }
    let label = results.iter().find_map(harness::result_agent_label).unwrap_or_default();
    print!("{}", SummaryTable::from_results(&results, &label));
    let curve = interaction_offset_analysis(&results, PlayerId(args.player));
    println!("\nreward by interaction offset ({} episodes aligned, {} never validated)", curve.episodes_used, curve.excluded);
    println!("{:>7} {:>5} {:>9} {:>9} {:>9}", "offset", "n", "mean", "lo95", "hi95");
    for p in &curve.points {
        println!("{:>7} {:>5} {:>9.3} {:>9.3} {:>9.3}", p.offset, p.n, p.mean, p.lo, p.hi);
    }
    let fmt = |m: Option<f64>| m.map_or_else(|| "n/a".to_string(), |m| format!("{m:.3}"));
    println!("pre-validation mean {}, post-validation mean {}", fmt(curve.pre_mean), fmt(curve.post_mean));
    if let Some(path) = args.svg {
        std::fs::write(&path, harness::offset_curve_svg(&curve))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn episode_files(path: &Path) -> Result<Vec<PathBuf>> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut out: Vec<PathBuf> = std::fs::read_dir(path)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            name.ends_with(".jsonl") && !name.ends_with(".cassette.jsonl")
        })
        .collect();
    out.sort();
    Ok(out)
}

fn replay(args: ReplayArgs) -> Result<ExitCode> {
    let mut mismatches = 0;
    for root in &args.paths {
        for path in episode_files(root)? {
            let report = replay_file(&path).with_context(|| format!("replaying {}", path.display()))?;
            match report.first_difference {
                None => println!("IDENTICAL {} ({} records)", path.display(), report.records),
                Some(i) => {
                    mismatches += 1;
                    println!("DIFFERS   {} at record {i}", path.display());
                }
            }
        }
    }
    Ok(if mismatches == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Analyze(a) => analyze(a),
        Command::Replay(a) => replay(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
