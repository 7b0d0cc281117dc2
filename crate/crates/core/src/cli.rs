//! Command-line front end.
//!
//! Points files are CSV with a header `f1,...,fm` and numbers printed with 17
//! significant digits, so they round-trip exactly. Reports are JSON.

use std::fs::File;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{run_representation, run_with_solver, RunConfig, RunReport, Termination, DEFAULT_MAX_ITERATIONS};
use crate::geometry::{BoxDims, SizeMode};
use crate::metrics::{quality_summary, QualityReport};
use crate::problems::{make_problem, ProblemKind, ProblemSpec};
use crate::scalarization::protocol::format_number;
use crate::scalarization::StreamSolver;
use crate::search_region::Strategy;

/// Exit status of a successful command.
pub const EXIT_OK: i32 = 0;
/// The run aborted, a protocol was violated, or strategies disagreed.
pub const EXIT_FAILURE: i32 = 1;
/// Invalid flags or inputs.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failure(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failure(_) | CliError::Io { .. } => EXIT_FAILURE,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "hyperboxing", version, about = "Box-based representations of Pareto fronts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute a representation of a built-in problem.
    Run(RunArgs),
    /// Run both strategies with the same configuration and compare timings.
    Compare(CompareArgs),
    /// Drive an external scalarization solver over standard streams.
    Serve(ServeArgs),
    /// Write a sample of a built-in problem's nondominated set.
    SampleFront(SampleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Absolute,
    Relative,
    /// Every edge divided by the smallest start box extent.
    Scaled,
}

impl From<ModeArg> for SizeMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Absolute => SizeMode::Absolute,
            ModeArg::Relative => SizeMode::Relative,
            ModeArg::Scaled => SizeMode::Scaled,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Naive,
    Improved,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Naive => Strategy::Naive,
            StrategyArg::Improved => Strategy::Improved,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    #[arg(long)]
    pub problem: ProblemKind,
    /// Number of objectives.
    #[arg(long, default_value_t = 3)]
    pub m: usize,
}

impl ProblemArgs {
    fn spec(&self) -> Result<ProblemSpec, CliError> {
        make_problem(self.problem, self.m).map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[derive(Debug, Clone, Args)]
pub struct LoopArgs {
    /// Target box size.
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Absolute)]
    pub epsilon_mode: ModeArg,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERATIONS)]
    pub max_iterations: usize,
}

impl LoopArgs {
    fn config(&self, strategy: Strategy) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::new(self.epsilon, self.epsilon_mode.into(), strategy);
        cfg.max_iterations = self.max_iterations;
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub run: LoopArgs,
    #[arg(long, value_enum, default_value_t = StrategyArg::Improved)]
    pub strategy: StrategyArg,
    /// Grid points per decision variable; also switches quadric problems to
    /// the grid solver.
    #[arg(long)]
    pub grid_resolution: Option<usize>,
    /// Points file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report file; standard error when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Seed of the front sample used for the empirical quality.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Front samples for the empirical quality; 0 skips it.
    #[arg(long, default_value_t = 20_000)]
    pub samples: usize,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub run: LoopArgs,
    #[arg(long)]
    pub grid_resolution: Option<usize>,
    /// Points file of the improved run.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comparison report; standard output when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    /// JSON file `{"l0": [...], "u0": [...]}` with the start box corners.
    #[arg(long)]
    pub start_box: PathBuf,
    #[command(flatten)]
    pub run: LoopArgs,
    #[arg(long, value_enum, default_value_t = StrategyArg::Improved)]
    pub strategy: StrategyArg,
    /// Points file written at termination.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report file; standard error when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, default_value_t = 20_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Sample file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Start box file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartBoxFile {
    pub l0: Vec<f64>,
    pub u0: Vec<f64>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct RunFileReport<'a> {
    problem: &'a str,
    #[serde(flatten)]
    run: &'a RunReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid_resolution: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    empirical_alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    quality: Option<QualityReport>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct CompareFileReport<'a> {
    problem: &'a str,
    identical: bool,
    /// Region-management time of improved over naive.
    region_time_ratio: f64,
    wall_time_ratio: f64,
    naive: &'a RunReport,
    improved: &'a RunReport,
}

/// Writes a points file: header `f1,...,fm`, then one row per point.
pub fn write_points_csv<W: Write + ?Sized, P: AsRef<[f64]>>(w: &mut W, m: usize, points: &[P]) -> io::Result<()> {
    let header: Vec<String> = (1..=m).map(|i| format!("f{i}")).collect();
    writeln!(w, "{}", header.join(","))?;
    for p in points {
        let row: Vec<String> = p.as_ref().iter().map(|&v| format_number(v)).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Parses a points file written by [`write_points_csv`].
pub fn read_points_csv(text: &str) -> Result<Vec<Vec<f64>>, String> {
    let mut lines = text.lines();
    let m = lines.next().ok_or("empty points file")?.split(',').count();
    lines
        .enumerate()
        .map(|(i, line)| {
            let row: Result<Vec<f64>, _> = line.split(',').map(str::parse::<f64>).collect();
            match row {
                Ok(r) if r.len() == m => Ok(r),
                _ => Err(format!("line {}: expected {m} numbers", i + 2)),
            }
        })
        .collect()
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn io_err(path: Option<&Path>) -> impl Fn(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf), source }
}

/// Writes to `path`, or to `fallback` when absent.
fn emit(
    path: Option<&Path>,
    fallback: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let mut w = create(p)?;
            f(&mut w).and_then(|_| w.flush()).map_err(io_err(path))
        }
        None => f(fallback).and_then(|_| fallback.flush()).map_err(io_err(None)),
    }
}

fn write_json<T: Serialize>(w: &mut dyn Write, value: &T) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    writeln!(w)
}

/// Exit status of a finished run; aborts are reported on `stderr`.
fn termination_status(report: &RunReport, stderr: &mut dyn Write) -> Result<(), CliError> {
    match &report.termination {
        Termination::Converged => Ok(()),
        Termination::Truncated => {
            // best effort: the diagnostic stream may be closed
            let _ = writeln!(stderr, "warning: stopped after {} iterations", report.iterations);
            Ok(())
        }
        Termination::Aborted(cause) => Err(CliError::Failure(format!("run aborted: {cause}"))),
    }
}

fn run_command(args: &RunArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let spec = args.problem.spec()?;
    let cfg = args.run.config(args.strategy.into())?;
    if args.grid_resolution.is_some_and(|r| r < 2) {
        return Err(CliError::Usage("grid resolution must be at least 2".into()));
    }
    let report = run_representation(&spec, cfg, args.grid_resolution).map_err(|e| CliError::Usage(e.to_string()))?;
    let points = report.points();
    emit(args.out.as_deref(), stdout, |w| write_points_csv(w, spec.m(), &points))?;
    let quality = if args.samples > 0 && !points.is_empty() && spec.has_front_sampler() {
        Some(quality_summary(&points, &spec, args.samples, args.seed).map_err(|e| CliError::Failure(e.to_string()))?)
    } else {
        None
    };
    let file = RunFileReport {
        problem: spec.name(),
        run: &report,
        grid_resolution: args.grid_resolution,
        empirical_alpha: quality.as_ref().map(|q| q.empirical_alpha),
        quality,
    };
    emit(args.report.as_deref(), stderr, |w| write_json(w, &file))?;
    termination_status(&report, stderr)
}

fn compare_command(args: &CompareArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let spec = args.problem.spec()?;
    let run = |strategy| -> Result<RunReport, CliError> {
        let report = run_representation(&spec, args.run.config(strategy)?, args.grid_resolution)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        termination_status(&report, &mut io::sink())?;
        Ok(report)
    };
    let naive = run(Strategy::Naive)?;
    let improved = run(Strategy::Improved)?;
    let identical = naive.representation == improved.representation;
    let file = CompareFileReport {
        problem: spec.name(),
        identical,
        region_time_ratio: improved.region_time_ms / naive.region_time_ms,
        wall_time_ratio: improved.wall_time_ms / naive.wall_time_ms,
        naive: &naive,
        improved: &improved,
    };
    if let Some(out) = &args.out {
        emit(Some(out), stdout, |w| write_points_csv(w, spec.m(), &improved.points()))?;
    }
    emit(args.report.as_deref(), stdout, |w| write_json(w, &file))?;
    termination_status(&improved, stderr)?;
    if !identical {
        return Err(CliError::Failure(format!(
            "strategies disagree: naive found {} points, improved {}",
            naive.cardinality, improved.cardinality
        )));
    }
    Ok(())
}

fn read_start_box(path: &Path) -> Result<BoxDims, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    let file: StartBoxFile =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    BoxDims::from_vecs(file.l0, file.u0).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn serve_command(
    args: &ServeArgs,
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let start = read_start_box(&args.start_box)?;
    let cfg = args.run.config(args.strategy.into())?;
    let mut solver = StreamSolver::new(stdin, &mut *stdout);
    let report = run_with_solver(&start, cfg, &mut solver).map_err(|e| CliError::Usage(e.to_string()))?;
    let handshake = solver.finish();
    if let Some(out) = &args.out {
        emit(Some(out), &mut io::sink(), |w| write_points_csv(w, start.dim(), &report.points()))?;
    }
    emit(args.report.as_deref(), stderr, |w| write_json(w, &report))?;
    termination_status(&report, stderr)?;
    handshake.map_err(|e| CliError::Failure(e.to_string()))
}

fn sample_command(args: &SampleArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let spec = args.problem.spec()?;
    if !spec.has_front_sampler() {
        return Err(CliError::Usage(format!("problem {} has no front sampler", spec.name())));
    }
    let samples = spec.sample_front(args.samples, args.seed);
    emit(args.out.as_deref(), stdout, |w| write_points_csv(w, spec.m(), &samples))
}

/// Executes a parsed command and returns its exit status; diagnostics go to
/// `stderr`.
pub fn execute(cli: &Cli, stdin: &mut dyn BufRead, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Run(a) => run_command(a, stdout, stderr),
        Command::Compare(a) => compare_command(a, stdout, stderr),
        Command::Serve(a) => serve_command(a, stdin, stdout, stderr),
        Command::SampleFront(a) => sample_command(a, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn parse(args: &[&str]) -> Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("hyperboxing").chain(args.iter().copied()))
    }

    fn exec(args: &[&str]) -> (i32, String, String) {
        let cli = parse(args).unwrap();
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = execute(&cli, &mut Cursor::new(Vec::new()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn csv_format() {
        let mut buf = Vec::new();
        write_points_csv(&mut buf, 2, &[[0.1, -1.0], [1e-5, 0.0]]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "f1,f2\n0.10000000000000001,-1\n1.0000000000000001e-05,0\n");
        assert_eq!(read_points_csv(&text).unwrap(), vec![vec![0.1, -1.0], vec![1e-5, 0.0]]);
        assert!(read_points_csv("f1,f2\n1\n").unwrap_err().starts_with("line 2"));
    }

    #[test]
    fn bad_flags_are_rejected_by_the_parser() {
        assert!(parse(&["run", "--problem", "sphere"]).is_err());
        assert!(parse(&["run", "--problem", "cube", "--epsilon", "0.1"]).is_err());
        assert!(parse(&["run", "--problem", "sphere", "--epsilon", "0.1", "--strategy", "fast"]).is_err());
        assert_eq!(parse(&["run", "--problem", "sphere"]).unwrap_err().exit_code(), EXIT_USAGE);
    }

    #[test]
    fn invalid_values_exit_with_usage_status() {
        let (code, _, err) = exec(&["run", "--problem", "sphere", "--epsilon=-1"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("epsilon"));
        let (code, _, _) = exec(&["run", "--problem", "comet", "--m", "4", "--epsilon", "0.1"]);
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn large_epsilon_gives_empty_points_file() {
        let (code, out, err) = exec(&["run", "--problem", "sphere", "--m", "2", "--epsilon", "1.5"]);
        assert_eq!(code, EXIT_OK, "{err}");
        assert_eq!(out, "f1,f2\n");
        let report: serde_json::Value = serde_json::from_str(&err).unwrap();
        assert_eq!(report["cardinality"], 0);
        assert_eq!(report["problem"], "sphere");
        assert!(report.get("empiricalAlpha").is_none());
    }

    #[test]
    fn run_report_fields() {
        let (code, out, err) =
            exec(&["run", "--problem", "sphere", "--epsilon", "0.5", "--samples", "200", "--seed", "3"]);
        assert_eq!(code, EXIT_OK, "{err}");
        let report: serde_json::Value = serde_json::from_str(&err).unwrap();
        let card = report["cardinality"].as_u64().unwrap() as usize;
        assert_eq!(out.lines().count(), card + 1);
        for key in ["m", "epsilon", "mode", "strategy", "iterations", "stalledBoxes", "finalMaxBoxSize", "wallTimeMs"] {
            assert!(report.get(key).is_some(), "missing {key}");
        }
        assert_eq!(report["termination"]["status"], "converged");
        assert!(report["empiricalAlpha"].as_f64().unwrap() >= 0.0);
    }

    #[test]
    fn compare_with_huge_epsilon() {
        let (code, out, err) = exec(&["compare", "--problem", "ellipsoid", "--epsilon", "10"]);
        assert_eq!(code, EXIT_OK, "{err}");
        let report: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(report["identical"], true);
        assert_eq!(report["naive"]["cardinality"], report["improved"]["cardinality"]);
    }

    #[test]
    fn truncated_run_still_succeeds() {
        let (code, out, err) = exec(&["run", "--problem", "sphere", "--epsilon", "0.1", "--max-iterations", "3"]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(out.lines().count(), 4);
        assert!(err.contains("truncated"));
    }

    #[test]
    fn serve_reports_malformed_line() {
        let dir = tempfile::tempdir().unwrap();
        let start = dir.path().join("box.json");
        std::fs::write(&start, r#"{"l0": [-1, -1], "u0": [0, 0]}"#).unwrap();
        let cli = parse(&["serve", "--start-box", start.to_str().unwrap(), "--epsilon", "0.1"]).unwrap();
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = execute(&cli, &mut Cursor::new(b"not json\n".to_vec()), &mut out, &mut err);
        assert_eq!(code, EXIT_FAILURE);
        let err = String::from_utf8(err).unwrap();
        assert!(err.contains("line 1"), "{err}");
        let out = String::from_utf8(out).unwrap();
        assert!(out.lines().next().unwrap().contains("\"query_id\""));
        assert_eq!(out.lines().last().unwrap(), r#"{"done":true}"#);
    }

    #[test]
    fn serve_rejects_bad_start_box() {
        let dir = tempfile::tempdir().unwrap();
        let start = dir.path().join("box.json");
        std::fs::write(&start, r#"{"l0": [0, 0], "u0": [0, 1]}"#).unwrap();
        let cli = parse(&["serve", "--start-box", start.to_str().unwrap(), "--epsilon", "0.1"]).unwrap();
        let code = execute(&cli, &mut Cursor::new(Vec::new()), &mut Vec::new(), &mut Vec::new());
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn sample_front_writes_nondominated_rows() {
        let (code, out, _) = exec(&["sample-front", "--problem", "sphere", "--m", "2", "--samples", "50"]);
        assert_eq!(code, EXIT_OK);
        let pts = read_points_csv(&out).unwrap();
        assert_eq!(pts.len(), 50);
        assert!(pts.iter().all(|p| (p[0] * p[0] + p[1] * p[1] - 1.0).abs() < 1e-12));
    }
}
