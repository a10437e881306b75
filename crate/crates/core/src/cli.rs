//! Command-line front end: `bound`, `simulate`, `sweep` and `check`.
//!
//! Every command reads an optional TOML run configuration and then applies
//! flag overrides. Output never depends on the worker count.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::analysis::{
    consensus_lower_bound, estimate_consensus, lemma_check_report, replicate_rng, replicate_seed, BoundReport,
    EstimateReport, ExpectedDisagreement, LemmaCheckConfig, RunRecord, Z_95,
};
use crate::dynamics::{run, SimParams};
use crate::error::Error;
use crate::graph::{generate, load_edge_list, Graph, GraphKind};
use crate::init::InitialDistribution;
use crate::space::{ConvexSet, Norm, NormKind, Opinion, OpinionSpace};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_IO: i32 = 3;

const DEFAULT_MC_SAMPLES: usize = 1_000_000;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Invalid(Error),
    Violation(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Invalid(_) => EXIT_USAGE,
            CliError::Violation(_) => EXIT_VIOLATION,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Invalid(e) => write!(f, "{e}"),
            CliError::Violation(m) => write!(f, "property violation: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Invalid(e)
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "deffuant", version, about = "Deffuant bounded-confidence dynamics on graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the consensus lower bound for the configured space and law.
    Bound(CommonArgs),
    /// Estimate the consensus probability by Monte Carlo.
    Simulate(SimulateArgs),
    /// Bound and estimate over an ascending grid of thresholds.
    Sweep(SweepArgs),
    /// Run the property suite; exits 2 on any violation.
    Check(CheckArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub runs: Option<usize>,
    /// Worker threads, 0 for all cores.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub eps_stop: Option<f64>,
    #[arg(long)]
    pub max_events: Option<u64>,
    /// complete:N | path:N | cycle:N | torus:WxH | star:N | er:N:P | file:PATH
    #[arg(long)]
    pub graph: Option<String>,
    /// Seed for random graph generators; defaults to --seed.
    #[arg(long)]
    pub graph_seed: Option<u64>,
    /// ball:d:r:norm[:c1,...,cd] | box:d:norm[:lo:hi]
    #[arg(long)]
    pub space: Option<String>,
    /// uniform | triangular | point:c1,...,cd | point:center
    #[arg(long)]
    pub dist: Option<String>,
    /// Significance level of the Wilson interval.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Probe points per recorded trajectory.
    #[arg(long)]
    pub probes: Option<usize>,
    /// Monte Carlo draws for E‖X − c‖ when no closed form exists.
    #[arg(long)]
    pub mc_samples: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Dump per-event trajectories of the first K runs.
    #[arg(long)]
    pub trajectories: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated ascending thresholds.
    #[arg(long, value_delimiter = ',')]
    pub taus: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub geometry_trials: Option<usize>,
    #[arg(long)]
    pub traces: Option<usize>,
    #[arg(long)]
    pub long_runs: Option<usize>,
    /// Test hook: replaces mu with 0.7 so validation must fail.
    #[arg(long)]
    pub inject_fault: bool,
}

/// Contents of the TOML configuration file. Every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub runs: Option<usize>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub tau: Option<f64>,
    pub mu: Option<f64>,
    pub eps_stop: Option<f64>,
    pub max_events: Option<u64>,
    pub graph: Option<String>,
    pub graph_seed: Option<u64>,
    pub space: Option<String>,
    pub dist: Option<String>,
    pub alpha: Option<f64>,
    pub probes: Option<usize>,
    pub mc_samples: Option<usize>,
    pub trajectories: Option<usize>,
    pub taus: Option<Vec<f64>>,
    pub geometry_trials: Option<usize>,
    pub traces: Option<usize>,
    pub long_runs: Option<usize>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("bad configuration: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        Self::from_toml(&text)
    }

    /// Applies flag values on top of the file values.
    pub fn apply(&mut self, a: &CommonArgs) {
        macro_rules! take {
            ($($f:ident),*) => { $( if a.$f.is_some() { self.$f = a.$f.clone(); } )* };
        }
        take!(
            seed, runs, workers, out, tau, mu, eps_stop, max_events, graph, graph_seed, space, dist, alpha, probes,
            mc_samples
        );
    }

    fn from_args(a: &CommonArgs) -> CliResult<Self> {
        let mut cfg = match &a.config {
            Some(p) => Self::load(p)?,
            None => RunConfig::default(),
        };
        cfg.apply(a);
        Ok(cfg)
    }
}

/// Graph given either by a generator or by an edge-list file.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSpec {
    Generated(GraphKind),
    File(PathBuf),
}

impl FromStr for GraphSpec {
    type Err = Error;

    fn from_str(s: &str) -> crate::error::Result<Self> {
        match s.trim().strip_prefix("file:") {
            Some(path) => Ok(GraphSpec::File(PathBuf::from(path))),
            None => s.parse().map(GraphSpec::Generated),
        }
    }
}

impl GraphSpec {
    pub fn build(&self, seed: u64) -> CliResult<Graph> {
        match self {
            GraphSpec::Generated(kind) => Ok(generate(*kind, seed)?.graph),
            GraphSpec::File(path) => {
                let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
                Ok(load_edge_list(&text)?)
            }
        }
    }
}

fn parse_coords(s: &str) -> crate::error::Result<Opinion> {
    s.split(',').map(|c| c.trim().parse::<f64>().map_err(|_| Error::invalid(format!("bad coordinate '{c}'")))).collect()
}

/// Parses `ball:d:r:norm[:c1,...,cd]` (centred at the origin by default) or
/// `box:d:norm[:lo:hi]` (the cube `[lo, hi]^d`, by default `[0, 1]^d`).
pub fn parse_space(s: &str) -> crate::error::Result<OpinionSpace> {
    let bad = |why: &str| Error::invalid(format!("cannot parse space '{s}': {why}"));
    let parts: Vec<&str> = s.trim().split(':').collect();
    let dim = |p: &str| p.parse::<usize>().ok().filter(|&d| d >= 1).ok_or_else(|| bad("dimension must be >= 1"));
    let num = |p: &str| p.parse::<f64>().map_err(|_| bad("expected a number"));
    match parts.as_slice() {
        ["ball", d, r, norm, rest @ ..] => {
            let d = dim(d)?;
            let center = match rest {
                [] => vec![0.0; d],
                [c] => parse_coords(c)?,
                _ => return Err(bad("too many fields")),
            };
            if center.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: center.len() });
            }
            OpinionSpace::ball(center, num(r)?, norm.parse()?)
        }
        ["box", d, norm, rest @ ..] => {
            let d = dim(d)?;
            let (lo, hi) = match rest {
                [] => (0.0, 1.0),
                [lo, hi] => (num(lo)?, num(hi)?),
                _ => return Err(bad("expected box:d:norm or box:d:norm:lo:hi")),
            };
            let kind: NormKind = norm.parse()?;
            OpinionSpace::new(ConvexSet::cuboid(vec![lo; d], vec![hi; d])?, Norm::new(kind, d)?)
        }
        _ => Err(bad("expected ball:d:r:norm or box:d:norm")),
    }
}

/// Parses `uniform`, `triangular`, `point:center` or `point:c1,...,cd`.
pub fn parse_dist(s: &str, space: &OpinionSpace) -> crate::error::Result<InitialDistribution> {
    let s = s.trim();
    match s {
        "uniform" => Ok(InitialDistribution::uniform(space.clone())),
        "triangular" => InitialDistribution::triangular(space.clone()),
        _ => match s.strip_prefix("point:") {
            Some("center") => InitialDistribution::point_mass(space.center().to_vec(), space.clone()),
            Some(coords) => InitialDistribution::point_mass(parse_coords(coords)?, space.clone()),
            None => Err(Error::invalid(format!("cannot parse distribution '{s}'"))),
        },
    }
}

/// Normal quantile for a two-sided interval at significance `alpha`.
pub fn z_for_alpha(alpha: f64) -> CliResult<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CliError::Invalid(Error::invalid(format!("alpha must lie in (0, 1), got {alpha}"))));
    }
    if alpha == 0.05 {
        return Ok(Z_95);
    }
    Ok(Normal::standard().inverse_cdf(1.0 - alpha / 2.0))
}

/// Validated run setup shared by all commands.
#[derive(Debug, Clone)]
pub struct Setup {
    pub graph_label: String,
    pub graph: Graph,
    pub space_label: String,
    pub space: OpinionSpace,
    pub dist_label: String,
    pub dist: InitialDistribution,
    pub seed: u64,
    pub runs: usize,
    pub workers: usize,
    pub z: f64,
    pub probes: usize,
    pub mc_samples: usize,
    pub out: Option<PathBuf>,
}

impl Setup {
    pub fn from_config(cfg: &RunConfig) -> CliResult<Self> {
        let seed = cfg.seed.unwrap_or(0);
        let space_label = cfg.space.clone().unwrap_or_else(|| "box:1:l2".into());
        let space = parse_space(&space_label)?;
        let dist_label = cfg.dist.clone().unwrap_or_else(|| "uniform".into());
        let dist = parse_dist(&dist_label, &space)?;
        let graph_label = cfg.graph.clone().unwrap_or_else(|| "complete:10".into());
        let graph = graph_label.parse::<GraphSpec>()?.build(cfg.graph_seed.unwrap_or(seed))?;
        let runs = cfg.runs.unwrap_or(100);
        if runs == 0 {
            return Err(CliError::Usage("--runs must be at least 1".into()));
        }
        Ok(Setup {
            graph_label,
            graph,
            space_label,
            space,
            dist_label,
            dist,
            seed,
            runs,
            workers: cfg.workers.unwrap_or(0),
            z: z_for_alpha(cfg.alpha.unwrap_or(0.05))?,
            probes: cfg.probes.unwrap_or(10),
            mc_samples: cfg.mc_samples.unwrap_or(DEFAULT_MC_SAMPLES),
            out: cfg.out.clone(),
        })
    }

    /// `E‖X − c‖`, analytic when possible; the Monte Carlo fallback uses a
    /// stream derived from the master seed.
    pub fn expected_disagreement(&self) -> CliResult<ExpectedDisagreement> {
        let mut rng = replicate_rng(self.seed, u64::MAX);
        Ok(ExpectedDisagreement::of(&self.dist, self.mc_samples, &mut rng)?)
    }

    /// Probe points for trajectory dumps: the centre, then uniform draws.
    pub fn probe_points(&self) -> CliResult<Vec<Opinion>> {
        let mut rng = replicate_rng(self.seed, u64::MAX - 1);
        let mut probes = vec![self.space.center().to_vec()];
        for _ in 1..self.probes {
            let mut c = vec![0.0; self.space.dim()];
            self.space.set().sample_uniform_into(&mut rng, &mut c)?;
            probes.push(c);
        }
        Ok(probes)
    }
}

fn sim_params(cfg: &RunConfig, tau: f64) -> CliResult<SimParams> {
    let mut p = SimParams::new(tau, cfg.mu.unwrap_or(0.5))?;
    if let Some(e) = cfg.eps_stop {
        p = p.with_eps_stop(e);
    }
    if let Some(m) = cfg.max_events {
        p = p.with_max_events(m);
    }
    Ok(p)
}

fn require_tau(cfg: &RunConfig) -> CliResult<f64> {
    cfg.tau.ok_or_else(|| CliError::Usage("--tau is required".into()))
}

fn out_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

/// Appends rows to a CSV file, writing the header only when the file is new
/// or empty. An existing file with a different header is refused.
pub fn append_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let existing = match fs::read_to_string(path) {
        Ok(text) => Some(text),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
        Err(e) => return Err(io_err(path, e)),
    };
    let needs_header = match existing.as_deref() {
        None | Some("") => true,
        Some(text) => {
            let first = text.lines().next().unwrap_or("");
            if first != header.join(",") {
                return Err(CliError::Io(format!("{}: existing header '{first}' does not match", path.display())));
            }
            false
        }
    };
    let file = fs::OpenOptions::new().create(true).append(true).open(path).map_err(|e| io_err(path, e))?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    if needs_header {
        w.write_record(header).map_err(|e| io_err(path, e))?;
    }
    for r in rows {
        w.write_record(r).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn csv_string(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

fn emit(out: &mut dyn Write, text: &str) -> CliResult<()> {
    out.write_all(text.as_bytes()).map_err(|e| CliError::Io(format!("stdout: {e}")))
}

pub fn cmd_bound(cfg: &RunConfig, out: &mut dyn Write) -> CliResult<BoundReport> {
    let setup = Setup::from_config(cfg)?;
    let report = consensus_lower_bound(require_tau(cfg)?, &setup.space, setup.expected_disagreement()?)?;
    if !report.applicable {
        emit(out, &format!("inapplicable: τ ≤ 𝖣/2 (tau = {}, D/2 = {})\n", report.tau, report.diameter / 2.0))?;
    }
    emit(out, &format!("{}\n", report.to_json()))?;
    if let Some(dir) = &setup.out {
        out_dir(dir)?;
        write_file(&dir.join("bound.json"), &format!("{}\n", report.to_json()))?;
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
struct RunSummary<'a> {
    graph: &'a str,
    space: &'a str,
    dist: &'a str,
    seed: u64,
    params: crate::dynamics::ResolvedParams,
    bound: &'a BoundReport,
    estimate: &'a EstimateReport,
    warnings: Vec<String>,
}

fn undecided_warning(report: &EstimateReport) -> Vec<String> {
    if report.n_undecided == 0 {
        return Vec::new();
    }
    vec![format!(
        "{} of {} runs hit max_events before absorption; they count as non-consensus",
        report.n_undecided, report.n_runs
    )]
}

pub fn cmd_simulate(cfg: &RunConfig, out: &mut dyn Write) -> CliResult<EstimateReport> {
    let setup = Setup::from_config(cfg)?;
    let tau = require_tau(cfg)?;
    let params = sim_params(cfg, tau)?;
    let resolved = params.resolve(&setup.graph, &setup.space)?;
    let bound = consensus_lower_bound(tau, &setup.space, setup.expected_disagreement()?)?;
    let est = estimate_consensus(
        &setup.graph,
        &setup.space,
        &setup.dist,
        &params,
        setup.runs,
        setup.seed,
        setup.workers,
        setup.z,
    )?;
    let summary = RunSummary {
        graph: &setup.graph_label,
        space: &setup.space_label,
        dist: &setup.dist_label,
        seed: setup.seed,
        params: resolved,
        bound: &bound,
        estimate: &est.report,
        warnings: undecided_warning(&est.report),
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    emit(out, &format!("{json}\n"))?;

    if let Some(dir) = &setup.out {
        out_dir(dir)?;
        write_file(&dir.join("summary.json"), &format!("{json}\n"))?;
        let rows: Vec<Vec<String>> = est.runs.iter().map(RunRecord::csv_row).collect();
        append_csv(&dir.join("runs.csv"), RunRecord::csv_header(), &rows)?;

        let k = cfg.trajectories.unwrap_or(0).min(setup.runs);
        if k > 0 {
            let recording = params.clone().recording(setup.probe_points()?);
            for i in 0..k {
                let mut rng = ChaCha8Rng::seed_from_u64(replicate_seed(setup.seed, i as u64));
                let outcome = run(&setup.graph, &setup.space, &setup.dist, &recording, &mut rng)?;
                let path = dir.join(format!("trajectory_{i:04}.csv"));
                let file = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
                let trace = outcome.trace.expect("recording was requested");
                trace.write_csv(std::io::BufWriter::new(file)).map_err(|e| io_err(&path, e))?;
            }
        }
    } else if cfg.trajectories.unwrap_or(0) > 0 {
        return Err(CliError::Usage("--trajectories needs --out".into()));
    }
    Ok(est.report)
}

pub const SWEEP_HEADER: [&str; 6] = ["tau", "clamped_bound", "point_estimate", "wilson_lo", "wilson_hi", "undecided"];

/// One row per threshold; every threshold reuses the same replicate seeds.
pub fn cmd_sweep(cfg: &RunConfig, out: &mut dyn Write) -> CliResult<Vec<Vec<String>>> {
    let grid = match &cfg.taus {
        Some(g) => g.clone(),
        None => vec![require_tau(cfg)?],
    };
    if grid.is_empty() {
        return Err(CliError::Usage("threshold grid is empty".into()));
    }
    if grid.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
        return Err(CliError::Usage(format!("threshold grid must be strictly ascending, got {grid:?}")));
    }
    let setup = Setup::from_config(cfg)?;
    let params: Vec<SimParams> = grid.iter().map(|&t| sim_params(cfg, t)).collect::<CliResult<_>>()?;
    for p in &params {
        p.resolve(&setup.graph, &setup.space)?;
    }
    let expected = setup.expected_disagreement()?;
    let mut rows = Vec::with_capacity(grid.len());
    for (tau, p) in grid.iter().zip(&params) {
        let bound = consensus_lower_bound(*tau, &setup.space, expected)?;
        let est = estimate_consensus(
            &setup.graph,
            &setup.space,
            &setup.dist,
            p,
            setup.runs,
            setup.seed,
            setup.workers,
            setup.z,
        )?;
        rows.push(vec![
            tau.to_string(),
            bound.clamped_bound.to_string(),
            est.report.point_estimate.to_string(),
            est.report.wilson_lo.to_string(),
            est.report.wilson_hi.to_string(),
            est.report.n_undecided.to_string(),
        ]);
    }
    emit(out, &csv_string(&SWEEP_HEADER, &rows))?;
    if let Some(dir) = &setup.out {
        out_dir(dir)?;
        append_csv(&dir.join("sweep.csv"), &SWEEP_HEADER, &rows)?;
    }
    Ok(rows)
}

/// Runs the property suite. With a threshold configured, an extra batch of
/// `runs` replicates on the configured graph feeds the absorption checks.
pub fn cmd_check(cfg: &RunConfig, out: &mut dyn Write) -> CliResult<crate::analysis::LemmaReport> {
    crate::space::check_mu(cfg.mu.unwrap_or(0.5))?;
    let setup = Setup::from_config(cfg)?;
    let extra = match cfg.tau {
        Some(tau) => {
            let params = sim_params(cfg, tau)?;
            estimate_consensus(
                &setup.graph,
                &setup.space,
                &setup.dist,
                &params,
                setup.runs,
                setup.seed,
                setup.workers,
                setup.z,
            )?
            .runs
        }
        None => Vec::new(),
    };
    let defaults = LemmaCheckConfig::default();
    let lc = LemmaCheckConfig {
        geometry_trials: cfg.geometry_trials.unwrap_or(defaults.geometry_trials),
        traces: cfg.traces.unwrap_or(defaults.traces),
        probes: setup.probes,
        long_runs: cfg.long_runs.unwrap_or(defaults.long_runs),
        seed: cfg.seed.unwrap_or(defaults.seed),
        workers: setup.workers,
    };
    let report = lemma_check_report(&lc, &extra)?;
    emit(out, &report.summary())?;
    if let Some(dir) = &setup.out {
        out_dir(dir)?;
        write_file(&dir.join("check.json"), &format!("{}\n", report.to_json()))?;
    }
    if !report.passed() {
        let failed: Vec<String> = report
            .records
            .iter()
            .filter(|r| !r.passed())
            .map(|r| match &r.counterexample {
                Some(ce) => format!("{} ({ce})", r.name),
                None => format!("{} (no trials)", r.name),
            })
            .collect();
        return Err(CliError::Violation(failed.join("; ")));
    }
    Ok(report)
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> CliResult<()> {
    match cli.command {
        Command::Bound(a) => cmd_bound(&RunConfig::from_args(&a)?, out).map(drop),
        Command::Simulate(a) => {
            let mut cfg = RunConfig::from_args(&a.common)?;
            if a.trajectories.is_some() {
                cfg.trajectories = a.trajectories;
            }
            cmd_simulate(&cfg, out).map(drop)
        }
        Command::Sweep(a) => {
            let mut cfg = RunConfig::from_args(&a.common)?;
            if a.taus.is_some() {
                cfg.taus = a.taus;
            }
            cmd_sweep(&cfg, out).map(drop)
        }
        Command::Check(a) => {
            let mut cfg = RunConfig::from_args(&a.common)?;
            macro_rules! take {
                ($($f:ident),*) => { $( if a.$f.is_some() { cfg.$f = a.$f; } )* };
            }
            take!(geometry_trials, traces, long_runs);
            if a.inject_fault {
                cfg.mu = Some(0.7);
            }
            cmd_check(&cfg, out).map(drop)
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let informational = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let sink: &mut dyn Write = if informational { out } else { err };
            let _ = write!(sink, "{}", e.render());
            return if informational { EXIT_OK } else { EXIT_USAGE };
        }
    };
    match dispatch(cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
