//! `ssqec`: code and check export, Monte Carlo sweeps and threshold fits.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use ssqec::codes::{
    analytic_toric_single_shot, build_code, derive_single_shot_basis, local_basis, validate_css,
    Family, Side,
};
use ssqec::gf2::rank;
use ssqec::protocol::CheckScheme;
use ssqec::stats::{
    fit_crossing, fit_sustainable, run_sweep_with, CrossingPoint, CrossingVerdict, SweepRecord,
};

use config::{parse_f64_list, parse_usize_list, ExperimentConfig, FitConfig, Model};
use output::{parse_csv, CrossingSummary, CsvSink, Summary};

const VERSION: &str = env!("SSQEC_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Core(ssqec::Error),
}

impl From<ssqec::Error> for CliError {
    fn from(e: ssqec::Error) -> Self {
        match e {
            ssqec::Error::InvalidParameter(m) => CliError::Config(m),
            ssqec::Error::FitFailure(m) => CliError::Fit(m),
            other => CliError::Core(other),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Fit(_) => 3,
            _ => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "ssqec", version = VERSION, about = "Single-shot error correction experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect a code.
    Code {
        #[command(subcommand)]
        action: CodeAction,
    },
    /// Export check matrices.
    Checks {
        #[command(subcommand)]
        action: ChecksAction,
    },
    /// Run a Monte Carlo sweep and write one CSV row per point.
    Simulate(SweepArgs),
    /// Fit thresholds to existing data.
    Fit {
        #[command(subcommand)]
        action: FitAction,
    },
    /// Sweep, then fit a crossing per N and the sustainable threshold.
    Sweep(SweepArgs),
}

#[derive(Subcommand)]
enum CodeAction {
    /// Print code parameters as JSON.
    Info(CodeArgs),
}

#[derive(Subcommand)]
enum ChecksAction {
    /// One line per check: side, kind, row, designated qubit, support.
    Export {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, value_parser = parse_side)]
        side: Side,
        #[arg(long, default_value = "local")]
        scheme: CheckScheme,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum FitAction {
    /// Crossing of p_L curves from a sweep CSV.
    Crossing {
        #[arg(long)]
        input: PathBuf,
        /// Round count to fit; required when the CSV holds several.
        #[arg(long = "N")]
        rounds: Option<usize>,
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long, env = "QEC_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Saturating p_th(N) curve from `N,p_th` pairs.
    Sustainable {
        /// CSV with a `N,p_th` header.
        #[arg(long, conflicts_with = "points")]
        input: Option<PathBuf>,
        /// Inline pairs such as `0:0.1027,1:0.0712`.
        #[arg(long)]
        points: Option<String>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct CodeArgs {
    #[arg(long)]
    family: Family,
    #[arg(long = "L")]
    size: usize,
}

#[derive(Args, Clone, Default)]
struct FitArgs {
    /// Starting guess for the crossing.
    #[arg(long)]
    p_th_guess: Option<f64>,
    #[arg(long)]
    mu_guess: Option<f64>,
    /// Half-width of the rate window around the guess.
    #[arg(long)]
    window: Option<f64>,
    /// Bootstrap resamples for the crossing's spread.
    #[arg(long)]
    bootstrap: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
}

impl FitArgs {
    fn config(&self) -> FitConfig {
        FitConfig {
            p_th_guess: self.p_th_guess,
            mu_guess: self.mu_guess,
            window: self.window,
            bootstrap: self.bootstrap,
            restarts: self.restarts,
        }
    }
}

/// A whole comma list or range given as one flag value.
#[derive(Clone, Debug)]
struct List<T>(Vec<T>);

#[derive(Args, Clone)]
struct SweepArgs {
    /// JSON config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    family: Option<Family>,
    /// Sizes as `a,b,c` or `start:stop:step`.
    #[arg(long = "L", value_parser = |s: &str| parse_usize_list(s).map(List))]
    sizes: Option<List<usize>>,
    #[arg(long)]
    scheme: Option<CheckScheme>,
    #[arg(long, value_enum)]
    model: Option<Model>,
    /// Rates as `a,b,c` or `start:stop:step`.
    #[arg(long, value_parser = |s: &str| parse_f64_list(s).map(List))]
    p: Option<List<f64>>,
    /// Noisy rounds before the closing perfect round.
    #[arg(long = "N", value_parser = |s: &str| parse_usize_list(s).map(List))]
    rounds: Option<List<usize>>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, env = "QEC_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// CSV output; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// JSON summary output.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// ZX model: whether ancilla depolarizing adds an outcome flip.
    #[arg(long)]
    ancilla_flip: Option<bool>,
    #[command(flatten)]
    fit: FitArgs,
}

impl SweepArgs {
    fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        cfg.overlay(ExperimentConfig {
            family: self.family,
            sizes: self.sizes.clone().map(|l| l.0),
            scheme: self.scheme,
            model: self.model,
            p: self.p.clone().map(|l| l.0),
            rounds: self.rounds.clone().map(|l| l.0),
            trials: self.trials,
            seed: self.seed,
            workers: self.workers,
            output: self.output.clone(),
            summary: self.summary.clone(),
            ancilla_flip: self.ancilla_flip,
            fit: self.fit.config(),
        });
        Ok(cfg)
    }
}

fn parse_side(s: &str) -> Result<Side, String> {
    s.parse().map_err(|e: ssqec::Error| e.to_string())
}

fn write_or_print(path: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("value serializes") + "\n"
}

#[derive(Serialize)]
struct CodeInfo {
    family: Family,
    #[serde(rename = "L")]
    size: usize,
    n: usize,
    k: usize,
    x_checks: usize,
    z_checks: usize,
    x_rank: usize,
    z_rank: usize,
    valid: bool,
    violations: Vec<String>,
}

fn code_info(args: &CodeArgs) -> Result<(), CliError> {
    let code = build_code(args.family, args.size)?;
    let report = validate_css(&code);
    let info = CodeInfo {
        family: code.family,
        size: code.size,
        n: code.n,
        k: code.k,
        x_checks: code.hx.rows(),
        z_checks: code.hz.rows(),
        x_rank: rank(&code.hx),
        z_rank: rank(&code.hz),
        valid: report.is_valid(),
        violations: report.violations.iter().map(|v| format!("{v:?}")).collect(),
    };
    print!("{}", json(&info));
    Ok(())
}

fn checks_export(
    args: &CodeArgs,
    side: Side,
    scheme: CheckScheme,
    output: Option<&PathBuf>,
) -> Result<(), CliError> {
    let code = build_code(args.family, args.size)?;
    let (checks, kinds, designated) = match scheme {
        CheckScheme::Local | CheckScheme::LocalRepeated => {
            let (m, kinds) = local_basis(&code, side);
            (m, kinds, None)
        }
        CheckScheme::SingleShotAnalytic => {
            if code.family != Family::Toric {
                return Err(CliError::Config(format!(
                    "analytic single-shot checks exist for the toric code only, not {}",
                    code.family
                )));
            }
            let b = analytic_toric_single_shot(args.size, side)?;
            (b.checks, b.kinds, Some(b.designated_qubit))
        }
        CheckScheme::SingleShotEliminated => {
            let b = derive_single_shot_basis(&code, side);
            (b.checks, b.kinds, Some(b.designated_qubit))
        }
    };
    let mut text = String::new();
    for (row, kind) in kinds.iter().enumerate() {
        let designated = designated
            .as_ref()
            .map_or("-".to_string(), |d| d[row].to_string());
        let support: Vec<String> = checks
            .row_support(row)
            .iter()
            .map(ToString::to_string)
            .collect();
        let kind = kind.label();
        text.push_str(&format!(
            "{side} {kind} {row} {designated} {}\n",
            support.join(" ")
        ));
    }
    write_or_print(output, &text)
}

fn thread_pool(workers: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w);
    }
    builder
        .build()
        .map_err(|e| CliError::Config(format!("cannot start workers: {e}")))
}

/// Runs the sweep of `cfg`, streaming rows and keeping the summary current.
fn run_simulation(
    cfg: &ExperimentConfig,
) -> Result<(Vec<SweepRecord>, Summary, Instant), CliError> {
    let spec = cfg.sweep_spec()?;
    let start = Instant::now();
    let mut summary = Summary {
        version: VERSION,
        config: cfg.clone(),
        partial: true,
        points_done: 0,
        points_total: spec.points.len(),
        wall_clock_seconds: 0.0,
        crossings: Vec::new(),
        sustainable: None,
        error: None,
    };
    if let Some(path) = &cfg.summary {
        summary.write(path)?;
    }
    let mut sink = CsvSink::create(cfg.output.as_deref())?;
    let pool = thread_pool(cfg.workers)?;
    let result = pool.install(|| {
        run_sweep_with(&spec, |r| {
            sink.push(r)
                .map_err(|e| ssqec::Error::ContractViolation(format!("cannot write row: {e}")))
        })
    });
    match result {
        Ok(records) => {
            summary.points_done = records.len();
            summary.partial = false;
            summary.wall_clock_seconds = start.elapsed().as_secs_f64();
            Ok((records, summary, start))
        }
        Err(e) => {
            summary.wall_clock_seconds = start.elapsed().as_secs_f64();
            summary.error = Some(e.to_string());
            if let Some(path) = &cfg.summary {
                summary.write(path)?;
            }
            Err(e.into())
        }
    }
}

fn simulate(args: &SweepArgs) -> Result<(), CliError> {
    let cfg = args.resolve()?;
    let (_, summary, _) = run_simulation(&cfg)?;
    if let Some(path) = &cfg.summary {
        summary.write(path)?;
    }
    Ok(())
}

/// Groups records by round count; repeated local checks form one group.
fn crossing_groups(records: &[SweepRecord]) -> Vec<(Option<usize>, Vec<CrossingPoint>)> {
    let mut groups: Vec<(Option<usize>, Vec<CrossingPoint>)> = Vec::new();
    for r in records {
        let key = (r.scheme != CheckScheme::LocalRepeated).then_some(r.rounds);
        match groups.iter_mut().find(|g| g.0 == key) {
            Some(g) => g.1.push(r.into()),
            None => groups.push((key, vec![r.into()])),
        }
    }
    groups
}

fn sweep(args: &SweepArgs) -> Result<(), CliError> {
    let cfg = args.resolve()?;
    let (records, mut summary, start) = run_simulation(&cfg)?;
    let mut fit_error = None;
    let mut thresholds = Vec::new();
    for (rounds, points) in crossing_groups(&records) {
        let ps: Vec<f64> = points.iter().map(|c| c.p).collect();
        let opts = cfg.fit.options(&ps, cfg.seed.unwrap_or(0));
        match fit_crossing(&points, &opts) {
            Ok(verdict) => {
                if let (Some(n), CrossingVerdict::Threshold(fit)) = (rounds, &verdict) {
                    thresholds.push((n, fit.p_th));
                }
                summary.crossings.push(CrossingSummary { rounds, verdict });
            }
            Err(e) => {
                let label = rounds.map_or("repeated".to_string(), |n| format!("N = {n}"));
                fit_error.get_or_insert_with(|| format!("{label}: {e}"));
            }
        }
    }
    let distinct: std::collections::BTreeSet<usize> = thresholds.iter().map(|t| t.0).collect();
    if distinct.len() >= 4 {
        match fit_sustainable(&thresholds) {
            Ok(fit) => summary.sustainable = Some(fit),
            Err(e) => {
                fit_error.get_or_insert_with(|| e.to_string());
            }
        }
    }
    summary.wall_clock_seconds = start.elapsed().as_secs_f64();
    summary.error = fit_error.clone();
    match &cfg.summary {
        Some(path) => summary.write(path)?,
        None => eprint!("{}", json(&summary)),
    }
    match fit_error {
        Some(e) => Err(CliError::Fit(e)),
        None => Ok(()),
    }
}

fn fit_crossing_cmd(
    input: &PathBuf,
    rounds: Option<usize>,
    fit: &FitArgs,
    seed: u64,
    output: Option<&PathBuf>,
) -> Result<(), CliError> {
    let text = std::fs::read_to_string(input)?;
    let records = parse_csv(&text)?;
    let groups = crossing_groups(&records);
    let chosen: Vec<_> = match rounds {
        Some(n) => groups.into_iter().filter(|g| g.0 == Some(n)).collect(),
        None => groups,
    };
    let (key, points) = match chosen.len() {
        1 => chosen.into_iter().next().expect("one group"),
        0 => return Err(CliError::Config("no rows match the requested N".into())),
        _ => {
            return Err(CliError::Config(
                "several N values present; pass --N".into(),
            ))
        }
    };
    let ps: Vec<f64> = points.iter().map(|c| c.p).collect();
    let opts = fit.config().options(&ps, seed);
    let verdict = fit_crossing(&points, &opts)?;
    let out = CrossingSummary {
        rounds: key,
        verdict,
    };
    write_or_print(output, &json(&out))
}

fn parse_threshold_pairs(text: &str, sep: char) -> Result<Vec<(usize, f64)>, CliError> {
    text.split(sep)
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let bad = || CliError::Config(format!("bad N,p_th pair {item:?}"));
            let (n, p) = item.split_once([':', ',']).ok_or_else(bad)?;
            Ok((
                n.trim().parse().map_err(|_| bad())?,
                p.trim().parse().map_err(|_| bad())?,
            ))
        })
        .collect()
}

fn fit_sustainable_cmd(
    input: Option<&PathBuf>,
    points: Option<&str>,
    output: Option<&PathBuf>,
) -> Result<(), CliError> {
    let pairs = match (input, points) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)?;
            let mut lines = text.lines();
            if lines.next().map(str::trim) != Some("N,p_th") {
                return Err(CliError::Config("expected a N,p_th header".into()));
            }
            parse_threshold_pairs(&lines.collect::<Vec<_>>().join("\n"), '\n')?
        }
        (None, Some(inline)) => {
            parse_threshold_pairs(inline, ',').or_else(|_| parse_threshold_pairs(inline, ';'))?
        }
        (None, None) => return Err(CliError::Config("pass --input or --points".into())),
    };
    let fit = fit_sustainable(&pairs)?;
    write_or_print(output, &json(&fit))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Code {
            action: CodeAction::Info(args),
        } => code_info(&args),
        Command::Checks {
            action:
                ChecksAction::Export {
                    code,
                    side,
                    scheme,
                    output,
                },
        } => checks_export(&code, side, scheme, output.as_ref()),
        Command::Simulate(args) => simulate(&args),
        Command::Sweep(args) => sweep(&args),
        Command::Fit {
            action:
                FitAction::Crossing {
                    input,
                    rounds,
                    fit,
                    seed,
                    output,
                },
        } => fit_crossing_cmd(&input, rounds, &fit, seed, output.as_ref()),
        Command::Fit {
            action:
                FitAction::Sustainable {
                    input,
                    points,
                    output,
                },
        } => fit_sustainable_cmd(input.as_ref(), points.as_deref(), output.as_ref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
