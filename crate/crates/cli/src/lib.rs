//! Argument parsing and execution for the `spanforest` binary.
//!
//! [`parse_args`] turns an argument vector into a validated [`RunConfig`];
//! [`execute`] runs it, writes the artifacts and returns the summary line.
//! Every artifact gets a sidecar `<path>.config.json` holding the config that
//! produced it.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use tempfile::NamedTempFile;

use spanforest::analysis::{fusion_probability, ratio_to_f64, FirstMeetingOracle};
use spanforest::experiments::churn::{churn_driver, ChurnConfig, ChurnSchedule};
use spanforest::experiments::{
    measure_meeting, random_connected_graph, run_figure, FigureId, FigureParams, FigureTable,
    Instance, MeetingConfig, Scenario,
};
use spanforest::seed::{rng_from_seed, subseed};
use spanforest::stats::Summary;
use spanforest::walk::Activation;
use spanforest::{BridgeSet, Tree, WalkPolicy, World};

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "SPANFOREST_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "spanforest",
    version,
    about = "Token random-walk spanning forests: analysis and simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Closed-form fusion probability and expected fusion time for two trees.
    Analyze(AnalyzeArgs),
    /// Monte-Carlo meeting measurement, or a churn run with --churn.
    Simulate(SimulateArgs),
    /// Regenerate one figure table as CSV.
    Figure(FigureArgs),
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    n1: u64,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    n2: u64,
    #[arg(long, default_value_t = 1)]
    k: u64,
    #[arg(long, default_value = "uniform")]
    policy: WalkPolicy,
    /// Draw uniform random trees and bridges from this seed instead of
    /// using two paths and the first k bridges in row-major order.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the result as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Tree size (meeting runs) or vertex count (churn runs).
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
    n1: u64,
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
    n2: u64,
    /// Bridges between the trees.
    #[arg(long, default_value_t = 1)]
    k: u64,
    #[arg(long, default_value = "uniform")]
    policy: WalkPolicy,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    runs: u64,
    /// Move cap per meeting run, or round cap for a churn run.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    steps: Option<u64>,
    /// Inter-meeting intervals collected per run.
    #[arg(long, default_value_t = 100)]
    intervals: u64,
    #[arg(long)]
    seed: u64,
    /// Per-run CSV, or the JSON-lines trace of a churn run.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Churn schedule (JSON lines). Switches to a churn run on a random
    /// connected graph with --n1 vertices and --extra chords.
    #[arg(long)]
    churn: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    extra: u64,
}

#[derive(Debug, Args)]
struct FigureArgs {
    #[arg(long)]
    id: FigureId,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// First-meeting runs per bridge count (fig2b, fig3b).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    runs: Option<u64>,
    /// Walk length (fig2c, fig3a).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    steps: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Analyze,
    Simulate,
    Figure,
}

/// A validated invocation. Serialized next to every artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub id: Option<FigureId>,
    pub n1: usize,
    pub n2: usize,
    pub k: usize,
    pub policy: WalkPolicy,
    pub runs: Option<usize>,
    pub steps: Option<u64>,
    pub intervals: Option<usize>,
    pub extra: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub churn: Option<PathBuf>,
    pub version: String,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] spanforest::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("run did not settle: {0}")]
    Unsettled(String),
}

impl CliError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

fn usage_error(msg: impl std::fmt::Display) -> clap::Error {
    use clap::CommandFactory;
    Cli::command().error(clap::error::ErrorKind::ValueValidation, msg)
}

fn to_usize(x: u64) -> usize {
    usize::try_from(x).unwrap_or(usize::MAX)
}

/// Parses and validates `argv` (including the program name).
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    let version = env!("CARGO_PKG_VERSION").to_string();
    let cfg = match cli.command {
        Cmd::Analyze(a) => {
            if a.k > a.n1 * a.n2 {
                return Err(usage_error(format!(
                    "--k {} exceeds n1*n2 = {}",
                    a.k,
                    a.n1 * a.n2
                )));
            }
            RunConfig {
                command: Command::Analyze,
                id: None,
                n1: to_usize(a.n1),
                n2: to_usize(a.n2),
                k: to_usize(a.k),
                policy: a.policy,
                runs: None,
                steps: None,
                intervals: None,
                extra: None,
                seed: a.seed,
                out: a.out,
                churn: None,
                version,
            }
        }
        Cmd::Simulate(s) => {
            if s.churn.is_none() {
                if s.k == 0 {
                    return Err(usage_error(
                        "meeting simulation needs --k >= 1 (no bridge, no meeting)",
                    ));
                }
                if s.k > s.n1 * s.n2 {
                    return Err(usage_error(format!(
                        "--k {} exceeds n1*n2 = {}",
                        s.k,
                        s.n1 * s.n2
                    )));
                }
            }
            let churn = s.churn.is_some();
            RunConfig {
                command: Command::Simulate,
                id: None,
                n1: to_usize(s.n1),
                n2: to_usize(s.n2),
                k: to_usize(s.k),
                policy: s.policy,
                runs: (!churn).then_some(to_usize(s.runs)),
                steps: s.steps,
                intervals: (!churn).then_some(to_usize(s.intervals)),
                extra: churn.then_some(to_usize(s.extra)),
                seed: Some(s.seed),
                out: s.out,
                churn: s.churn,
                version,
            }
        }
        Cmd::Figure(f) => RunConfig {
            command: Command::Figure,
            id: Some(f.id),
            n1: 50,
            n2: 50,
            k: 0,
            policy: match f.id {
                FigureId::Fig3a => WalkPolicy::NonBacktracking,
                _ => WalkPolicy::Uniform,
            },
            runs: f.runs.map(to_usize),
            steps: f.steps,
            intervals: None,
            extra: None,
            seed: Some(f.seed),
            out: f.out,
            churn: None,
            version,
        },
    };
    Ok(cfg)
}

/// Result of [`execute`].
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    /// One-line summary for the terminal.
    pub summary: String,
    /// Extra lines printed before the summary.
    pub details: Vec<String>,
    /// Artifacts written, each with its sidecar.
    pub artifacts: Vec<PathBuf>,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".config.json");
    PathBuf::from(s)
}

/// Writes `contents` to `path` and the config to its sidecar. Both go through
/// temporary files in the target directory, so a failure leaves neither.
pub fn write_artifact(path: &Path, contents: &[u8], cfg: &RunConfig) -> Result<(), CliError> {
    let side = sidecar_path(path);
    let config = serde_json::to_vec_pretty(cfg).expect("config serializes");
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let stage = |bytes: &[u8]| -> Result<NamedTempFile, CliError> {
        let mut tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, e))?;
        tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
        tmp.flush().map_err(|e| CliError::io(path, e))?;
        Ok(tmp)
    };
    let main = stage(contents)?;
    let sidecar = stage(&config)?;
    main.persist(path)
        .map_err(|e| CliError::io(path, e.error))?;
    if let Err(e) = sidecar.persist(&side) {
        let _ = fs::remove_file(path);
        return Err(CliError::io(&side, e.error));
    }
    Ok(())
}

/// Runs a validated config.
pub fn execute(cfg: &RunConfig) -> Result<Report, CliError> {
    match cfg.command {
        Command::Analyze => analyze(cfg),
        Command::Simulate if cfg.churn.is_some() => churn(cfg),
        Command::Simulate => simulate(cfg),
        Command::Figure => figure(cfg),
    }
}

#[derive(Serialize)]
struct Analysis {
    trees: &'static str,
    t1_edges: Vec<(usize, usize)>,
    t2_edges: Vec<(usize, usize)>,
    bridges: Vec<(usize, usize)>,
    fusion_probability: String,
    fusion_probability_value: f64,
    expected_fusion_time: Option<String>,
    expected_fusion_time_value: Option<f64>,
    first_meeting_uniform_starts: Option<f64>,
}

// the first-meeting chain has about n1*n2*d^2 states
const ORACLE_LIMIT: usize = 400;

fn analyze(cfg: &RunConfig) -> Result<Report, CliError> {
    let (trees, inst) = match cfg.seed {
        Some(seed) => (
            "random",
            Instance::generate(cfg.n1, cfg.n2, cfg.k, &mut rng_from_seed(seed))?,
        ),
        None => {
            let bridges = (0..cfg.k).map(|i| (i / cfg.n2, i % cfg.n2)).collect();
            let inst = Instance {
                t1: Tree::path(cfg.n1),
                t2: Tree::path(cfg.n2),
                bridges: BridgeSet::new(bridges)?,
            };
            ("path", inst)
        }
    };
    let p = fusion_probability(&inst.t1, &inst.t2, &inst.bridges)?;
    let t = (*p.numer() != 0).then(|| p.recip());
    let first = if cfg.k > 0 && cfg.n1 * cfg.n2 <= ORACLE_LIMIT {
        FirstMeetingOracle::solve(
            &inst.t1,
            &inst.t2,
            &inst.bridges,
            cfg.policy,
            Activation::ShuffledRounds,
        )
        .and_then(|o| o.uniform_mean())
        .ok()
    } else {
        None
    };
    let result = Analysis {
        trees,
        t1_edges: inst.t1.canonical_edges(),
        t2_edges: inst.t2.canonical_edges(),
        bridges: inst.bridges.pairs().to_vec(),
        fusion_probability: p.to_string(),
        fusion_probability_value: ratio_to_f64(p),
        expected_fusion_time: t.map(|t| t.to_string()),
        expected_fusion_time_value: t.map(ratio_to_f64),
        first_meeting_uniform_starts: first,
    };
    let mut details = vec![
        format!(
            "fusion probability = {} = {}",
            result.fusion_probability, result.fusion_probability_value
        ),
        match (
            &result.expected_fusion_time,
            result.expected_fusion_time_value,
        ) {
            (Some(s), Some(v)) => format!("expected fusion time = {s} = {v}"),
            _ => "expected fusion time = infinite (no bridges)".to_string(),
        },
    ];
    if let Some(f) = first {
        details.push(format!(
            "first meeting from uniform starts ({}) = {f:.4}",
            cfg.policy
        ));
    }
    let mut artifacts = Vec::new();
    if let Some(out) = &cfg.out {
        let json = serde_json::to_vec_pretty(&result).expect("analysis serializes");
        write_artifact(out, &json, cfg)?;
        artifacts.push(out.clone());
    }
    Ok(Report {
        summary: format!(
            "analyze {trees} trees n1={} n2={} k={}: P = {}, E[T] = {}",
            cfg.n1,
            cfg.n2,
            cfg.k,
            result.fusion_probability_value,
            result
                .expected_fusion_time_value
                .map_or("inf".to_string(), |v| v.to_string())
        ),
        details,
        artifacts,
    })
}

fn ci(s: &Summary) -> String {
    format!("{:.2} ± {:.2}", s.mean, s.half_width)
}

fn simulate(cfg: &RunConfig) -> Result<Report, CliError> {
    let seed = cfg.seed.expect("validated");
    let scenario = Scenario::new(cfg.n1, cfg.n2, cfg.k, seed);
    let mut mcfg = MeetingConfig {
        runs: cfg.runs.expect("validated"),
        intervals: cfg.intervals.unwrap_or(0),
        ..MeetingConfig::default()
    };
    if let Some(cap) = cfg.steps {
        mcfg.max_moves = cap;
    }
    let m = measure_meeting(&scenario, cfg.policy, &mcfg)?;
    let mut artifacts = Vec::new();
    if let Some(out) = &cfg.out {
        let mut csv = String::from(
            "run,first_meeting_moves,first_meeting_rounds,intervals,inter_meeting_mean\n",
        );
        for (i, r) in m.runs.iter().enumerate() {
            csv.push_str(&format!(
                "{i},{},{},{},{}\n",
                r.first_meeting_moves,
                r.first_meeting_rounds,
                r.inter_meeting_moves.len(),
                r.inter_meeting_mean()
                    .map_or(String::new(), |x| format!("{x:.3}"))
            ));
        }
        write_artifact(out, csv.as_bytes(), cfg)?;
        artifacts.push(out.clone());
    }
    let mut summary = format!(
        "simulate {} n1={} n2={} k={} runs={}: first meeting {} moves",
        cfg.policy,
        cfg.n1,
        cfg.n2,
        cfg.k,
        m.runs.len(),
        ci(&m.first_meeting)
    );
    if mcfg.intervals > 0 {
        summary.push_str(&format!(
            ", inter-meeting {} moves (closed form {:.2})",
            ci(&m.inter_meeting),
            m.analytic
        ));
    }
    Ok(Report {
        summary,
        details: Vec::new(),
        artifacts,
    })
}

fn churn(cfg: &RunConfig) -> Result<Report, CliError> {
    let path = cfg.churn.as_ref().expect("churn run");
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let schedule = ChurnSchedule::from_jsonl(&text)?;
    let seed = cfg.seed.expect("validated");
    let edges = random_connected_graph(
        cfg.n1,
        cfg.extra.unwrap_or(0),
        &mut rng_from_seed(subseed(seed, 0)),
    )?;
    let (mut world, vs) = World::with_vertices(cfg.n1);
    for (a, b) in edges {
        world.add_edge(vs[a], vs[b])?;
    }
    let mut rng = rng_from_seed(subseed(seed, 1));
    let ccfg = ChurnConfig {
        policy: cfg.policy,
        max_rounds: cfg.steps.unwrap_or(ChurnConfig::default().max_rounds),
        ..ChurnConfig::default()
    };
    world
        .run_to_quiescence(
            cfg.policy,
            ccfg.max_rounds.saturating_mul(cfg.n1 as u64),
            &mut rng,
        )
        .ok_or_else(|| {
            CliError::Unsettled("the initial graph did not converge to one tree".into())
        })?;
    let trace = churn_driver(&mut world, &schedule, &ccfg, &mut rng)?;
    let mut artifacts = Vec::new();
    if let Some(out) = &cfg.out {
        write_artifact(out, trace.to_jsonl().as_bytes(), cfg)?;
        artifacts.push(out.clone());
    }
    let peak = trace.records.iter().map(|r| r.tokens).max().unwrap_or(1);
    let last = trace
        .records
        .last()
        .map_or(world.token_count(), |r| r.tokens);
    Ok(Report {
        summary: format!(
            "churn {} events over {} rounds: peak {peak} tokens, final {last} tokens, {}",
            schedule.events.len(),
            trace.rounds,
            if trace.quiescent {
                "one tree per component"
            } else {
                "round cap reached before quiescence"
            }
        ),
        details: Vec::new(),
        artifacts,
    })
}

fn figure_params(cfg: &RunConfig) -> FigureParams {
    let mut p = FigureParams::new(cfg.seed.expect("validated"));
    if let Some(runs) = cfg.runs {
        p.runs = runs;
        p.interval_runs = p.interval_runs.min(runs);
    }
    if let Some(steps) = cfg.steps {
        p.steps = steps;
    }
    p
}

fn figure_summary(t: &FigureTable) -> String {
    let col = |name: &str| -> Vec<f64> {
        t.column(name)
            .unwrap_or_default()
            .iter()
            .filter_map(|v| v.parse().ok())
            .collect()
    };
    let row = |i: usize, name: &str| col(name).get(i).copied().unwrap_or(f64::NAN);
    match t.id {
        FigureId::Fig2a => {
            let w = Summary::of(&col("within_10pct"));
            format!(
                "{} sizes, share of instances within 10%: mean {:.3}",
                t.rows.len(),
                w.mean
            )
        }
        FigureId::Fig2b | FigureId::Fig3b => {
            let last = t.rows.len().saturating_sub(1);
            let k = |i: usize| t.rows.get(i).map_or("?", |r| r[0].as_str());
            format!(
                "k={}: first {:.1} ± {:.1}, inter {:.1} ± {:.1}; k={}: first {:.1} ± {:.1}, inter {:.1} ± {:.1}",
                k(0),
                row(0, "first_meeting_mean"),
                row(0, "first_meeting_ci95"),
                row(0, "inter_meeting_mean"),
                row(0, "inter_meeting_ci95"),
                k(last),
                row(last, "first_meeting_mean"),
                row(last, "first_meeting_ci95"),
                row(last, "inter_meeting_mean"),
                row(last, "inter_meeting_ci95"),
            )
        }
        FigureId::Fig2c | FigureId::Fig3a => {
            let g = Summary::of(&col("gap"));
            format!(
                "{} visits, gap {:.2} ± {:.2}, cv {:.3}",
                t.rows.len(),
                g.mean,
                g.half_width,
                g.cv()
            )
        }
    }
}

fn figure(cfg: &RunConfig) -> Result<Report, CliError> {
    let id = cfg.id.expect("validated");
    let table = run_figure(id, &figure_params(cfg))?;
    let csv = table.to_csv();
    let mut artifacts = Vec::new();
    let mut details = Vec::new();
    match &cfg.out {
        Some(out) => {
            write_artifact(out, csv.as_bytes(), cfg)?;
            artifacts.push(out.clone());
        }
        None => details.extend(csv.lines().map(str::to_string)),
    }
    Ok(Report {
        summary: format!("{id}: {}", figure_summary(&table)),
        details,
        artifacts,
    })
}
