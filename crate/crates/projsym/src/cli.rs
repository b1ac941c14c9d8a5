//! Command-line front end: configure experiments, run the exact and
//! statistical suites, and emit machine-readable reports and sample
//! dumps.
//!
//! Exit codes: `0` all checks passed, `1` a check failed or a run
//! aborted, `2` usage or validation error, `3` I/O error.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::Error;
use crate::linalg::RealVector;
use crate::projection::{sample_projection_batch, ProjectionSample};
use crate::report::{ExactCheckResult, TestReport};
use crate::rng::StreamKey;
use crate::stats::StatTestResult;
use crate::suite::{
    run_exact_tier, run_statistical_suite, SuiteParams, TransformKind, DEFAULT_PERMUTATIONS,
    X_DERIVATION_STREAM,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Parser)]
#[command(
    name = "projsym",
    version,
    about = "Random subspace projections of a fixed vector and the symmetries of their distribution"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw projection samples and dump one row per trial
    Sample(CommonArgs),
    /// Check the exact equivariance identities over fresh random ensembles
    CheckExact(CommonArgs),
    /// Run the statistical equality-in-distribution suite
    CheckStat(CommonArgs),
    /// Run the exact tier plus the statistical suites and emit one combined report
    Report(CommonArgs),
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Ambient dimension (default 8; inferred from --x-file when given)
    #[arg(long)]
    p: Option<usize>,

    /// Subspace dimension (default 2, clamped to p)
    #[arg(long)]
    m: Option<usize>,

    /// Samples per batch (sample: 100, check-stat: 4000) or random
    /// configurations (check-exact: 1000)
    #[arg(long)]
    trials: Option<usize>,

    /// Base seed; multi-seed commands derive their default seed list
    /// from it
    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Comma-separated seed list for the statistical suite
    /// (default: 20 consecutive seeds starting at --seed)
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,

    /// Rejection level shared by every statistical test
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,

    /// Output format; sample dumps default to csv, reports are json
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,

    /// Write output to this path instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,

    /// Read x from a file of whitespace-separated coordinates
    #[arg(long, conflicts_with = "x_basis")]
    x_file: Option<PathBuf>,

    /// Use the k-th standard basis vector (0-based) as x
    #[arg(long)]
    x_basis: Option<usize>,

    /// Replace the on-axis transform with an off-axis control the
    /// suite is expected to reject
    #[arg(long, value_enum, default_value_t = NegativeControl::None)]
    negative_control: NegativeControl,

    /// Angle in degrees between x and the negative-control axis
    #[arg(long, default_value_t = 45.0)]
    angle: f64,

    /// Debug override of the exact-tier residual tolerance
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum NegativeControl {
    None,
    ReflectOffAxis,
    RotateOffAxis,
}

impl NegativeControl {
    fn label(&self) -> &'static str {
        match self {
            NegativeControl::None => "none",
            NegativeControl::ReflectOffAxis => "reflect-off-axis",
            NegativeControl::RotateOffAxis => "rotate-off-axis",
        }
    }
}

/// Full configuration echo embedded in every report, sufficient to
/// reproduce the run.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub p: usize,
    pub m: usize,
    pub trials: usize,
    pub seeds: Vec<u64>,
    pub alpha: f64,
    pub x_source: String,
    pub output_format: String,
    pub output_path: Option<String>,
    pub negative_control: String,
    pub angle_degrees: f64,
    pub tol: f64,
}

#[derive(Serialize)]
struct CliReport<'a> {
    config: &'a RunConfig,
    exact_checks: Vec<ExactCheckResult>,
    stat_tests: Vec<StatTestResult>,
    overall_pass: bool,
}

#[derive(Serialize)]
struct SampleDump<'a> {
    config: &'a RunConfig,
    samples: Vec<SampleRow>,
}

#[derive(Serialize)]
struct SampleRow {
    stream_index: u64,
    alpha: f64,
    perp_norm: f64,
    px: Vec<f64>,
}

enum Failure {
    Usage(String),
    Io(String),
    /// A run that started but could not complete (for example a
    /// rank-deficient batch that survived its retry).
    Run(String),
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(Failure::Usage(msg.into()))
}

fn run_failure(e: Error) -> Failure {
    Failure::Run(e.to_string())
}

/// Parses the process arguments, runs the chosen command, and returns
/// the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version go to stdout with a zero exit; real
            // parse errors go to stderr with the usage exit code.
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Sample(args) => cmd_sample(&args),
        Command::CheckExact(args) => cmd_check_exact(&args),
        Command::CheckStat(args) => cmd_check_stat(&args),
        Command::Report(args) => cmd_report(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Io(msg)) => {
            eprintln!("I/O error: {msg}");
            EXIT_IO
        }
        Err(Failure::Run(msg)) => {
            eprintln!("run aborted: {msg}");
            EXIT_FAIL
        }
    }
}

struct Resolved {
    x: RealVector,
    p: usize,
    m: usize,
    trials: usize,
    seeds: Vec<u64>,
    config: RunConfig,
}

fn resolve(
    args: &CommonArgs,
    command: &str,
    default_trials: usize,
    multi_seed: bool,
    format_label: &str,
) -> CliResult<Resolved> {
    let (x, x_source) = resolve_x(args)?;
    let p = x.dim();
    let m = args.m.unwrap_or_else(|| 2.min(p));
    if m == 0 || m > p {
        return usage("m must satisfy 1 <= m <= p");
    }
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return usage("alpha must lie in (0, 1)");
    }
    if !args.angle.is_finite() {
        return usage("angle must be finite");
    }
    if args.tol.is_nan() || args.tol <= 0.0 {
        return usage("tol must be positive");
    }
    let trials = args.trials.unwrap_or(default_trials);
    if trials == 0 {
        return usage("trials must be at least 1");
    }
    let seeds = if multi_seed {
        match &args.seeds {
            Some(list) if list.is_empty() => return usage("--seeds must not be empty"),
            Some(list) => list.clone(),
            None => (args.seed..args.seed.saturating_add(20)).collect(),
        }
    } else {
        vec![args.seed]
    };
    let config = RunConfig {
        command: command.to_owned(),
        p,
        m,
        trials,
        seeds: seeds.clone(),
        alpha: args.alpha,
        x_source,
        output_format: format_label.to_owned(),
        output_path: args.out.as_ref().map(|p| p.display().to_string()),
        negative_control: args.negative_control.label().to_owned(),
        angle_degrees: args.angle,
        tol: args.tol,
    };
    Ok(Resolved {
        x,
        p,
        m,
        trials,
        seeds,
        config,
    })
}

fn resolve_x(args: &CommonArgs) -> CliResult<(RealVector, String)> {
    if let Some(path) = &args.x_file {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        let coords = text
            .split_whitespace()
            .map(str::parse::<f64>)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Failure::Usage(format!("--x-file: {e}")))?;
        let x = match RealVector::new(coords) {
            Ok(x) => x,
            Err(e) => return usage(format!("--x-file: {e}")),
        };
        if x.norm() == 0.0 {
            return usage("--x-file: x must be nonzero");
        }
        if let Some(p) = args.p {
            if p != x.dim() {
                return usage(format!(
                    "--p {} does not match the {} coordinates in --x-file",
                    p,
                    x.dim()
                ));
            }
        }
        let source = format!("file:{}", path.display());
        return Ok((x, source));
    }
    let p = args.p.unwrap_or(8);
    if p == 0 {
        return usage("p must be at least 1");
    }
    if let Some(k) = args.x_basis {
        if k >= p {
            return usage("--x-basis index must lie below p");
        }
        let x = RealVector::basis_vector(p, k).expect("k < p");
        return Ok((x, format!("basis-vector:{k}")));
    }
    Ok((derive_unit_x(p, args.seed), "random-unit".to_owned()))
}

/// Deterministic pseudo-random unit vector derived from the seed on a
/// reserved stream.
fn derive_unit_x(p: usize, seed: u64) -> RealVector {
    let mut offset = 0;
    loop {
        let candidate = StreamKey::with_stream(seed, X_DERIVATION_STREAM + offset)
            .open()
            .normal_vector(p);
        if let Ok(unit) = candidate.normalized() {
            return unit;
        }
        offset += 1;
    }
}

fn resolve_format(args: &CommonArgs, default: OutputFormat, command: &str) -> CliResult<OutputFormat> {
    let format = args.format.unwrap_or(default);
    if format == OutputFormat::Csv && default == OutputFormat::Json {
        return usage(format!(
            "{command} emits the json report schema; --format csv applies to sample"
        ));
    }
    Ok(format)
}

fn write_output(out: &Option<PathBuf>, content: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(content.as_bytes())
            .map_err(|e| Failure::Io(e.to_string())),
    }
}

fn to_json(value: &impl Serialize) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    text
}

fn cmd_sample(args: &CommonArgs) -> CliResult<i32> {
    let format = resolve_format(args, OutputFormat::Csv, "sample")?;
    let label = match format {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    };
    let r = resolve(args, "sample", 100, false, label)?;
    let samples =
        sample_projection_batch(&r.x, r.m, r.trials, args.seed).map_err(run_failure)?;
    let content = match format {
        OutputFormat::Csv => sample_csv(&samples, r.p),
        OutputFormat::Json => {
            let dump = SampleDump {
                config: &r.config,
                samples: samples
                    .iter()
                    .map(|s| SampleRow {
                        stream_index: s.stream_index,
                        alpha: s.alpha,
                        perp_norm: s.perp_norm(),
                        px: s.px.coords().to_vec(),
                    })
                    .collect(),
            };
            to_json(&dump)
        }
    };
    write_output(&args.out, &content)?;
    Ok(EXIT_PASS)
}

/// Fixed header `stream_index,alpha,perp_norm,px_0,...,px_{p-1}`;
/// floats are written in their shortest round-trip decimal form.
fn sample_csv(samples: &[ProjectionSample], p: usize) -> String {
    let mut out = String::from("stream_index,alpha,perp_norm");
    for j in 0..p {
        out.push_str(&format!(",px_{j}"));
    }
    out.push('\n');
    for s in samples {
        out.push_str(&format!("{},{},{}", s.stream_index, s.alpha, s.perp_norm()));
        for c in s.px.coords() {
            out.push(',');
            out.push_str(&format!("{c}"));
        }
        out.push('\n');
    }
    out
}

fn cmd_check_exact(args: &CommonArgs) -> CliResult<i32> {
    resolve_format(args, OutputFormat::Json, "check-exact")?;
    let r = resolve(args, "check-exact", 1000, false, "json")?;
    let checks =
        run_exact_tier(&r.x, r.m, r.trials, args.seed, args.tol).map_err(run_failure)?;
    let overall_pass = checks.iter().all(|c| c.pass);
    for c in &checks {
        eprintln!(
            "{}: max_residual {:e} (tol {:e}) -> {}",
            c.check_name,
            c.max_residual,
            c.tol,
            if c.pass { "pass" } else { "FAIL" }
        );
    }
    let report = CliReport {
        config: &r.config,
        exact_checks: checks,
        stat_tests: Vec::new(),
        overall_pass,
    };
    write_output(&args.out, &to_json(&report))?;
    Ok(if overall_pass { EXIT_PASS } else { EXIT_FAIL })
}

fn suite_kinds(args: &CommonArgs) -> Vec<TransformKind> {
    match args.negative_control {
        NegativeControl::None => vec![TransformKind::Reflection, TransformKind::Rotation],
        NegativeControl::ReflectOffAxis => vec![TransformKind::OffAxisReflection {
            angle_degrees: args.angle,
        }],
        NegativeControl::RotateOffAxis => vec![TransformKind::OffAxisRotation {
            angle_degrees: args.angle,
        }],
    }
}

fn run_suites(r: &Resolved, args: &CommonArgs) -> CliResult<Vec<TestReport>> {
    suite_kinds(args)
        .into_iter()
        .map(|kind| {
            let params = SuiteParams {
                m: r.m,
                n: r.trials,
                seeds: r.seeds.clone(),
                alpha: args.alpha,
                n_permutations: DEFAULT_PERMUTATIONS,
                transform: kind,
            };
            run_statistical_suite(&r.x, &params).map_err(run_failure)
        })
        .collect()
}

fn cmd_check_stat(args: &CommonArgs) -> CliResult<i32> {
    resolve_format(args, OutputFormat::Json, "check-stat")?;
    let r = resolve(args, "check-stat", 4000, true, "json")?;
    if r.trials < 1000 {
        eprintln!("warning: fewer than 1000 trials per batch weakens the statistical tests");
    }
    let reports = run_suites(&r, args)?;
    let merged = TestReport::merged(reports).expect("at least one suite ran");
    emit_report(&r.config, &args.out, merged)
}

fn cmd_report(args: &CommonArgs) -> CliResult<i32> {
    resolve_format(args, OutputFormat::Json, "report")?;
    let r = resolve(args, "report", 4000, true, "json")?;
    let exact =
        run_exact_tier(&r.x, r.m, 1000, args.seed, args.tol).map_err(run_failure)?;
    let exact_pass = exact.iter().all(|c| c.pass);
    let mut reports = vec![TestReport {
        config: crate::report::ReportConfig {
            p: r.p,
            m: r.m,
            n: r.trials,
            seeds: r.seeds.clone(),
            alpha: args.alpha,
            transform: "exact_tier".to_owned(),
        },
        exact_checks: exact,
        stat_tests: Vec::new(),
        overall_pass: exact_pass,
    }];
    reports.extend(run_suites(&r, args)?);
    let merged = TestReport::merged(reports).expect("at least one report");
    emit_report(&r.config, &args.out, merged)
}

fn emit_report(
    config: &RunConfig,
    out: &Option<PathBuf>,
    merged: TestReport,
) -> CliResult<i32> {
    let rejected = merged.stat_tests.iter().filter(|t| t.reject).count();
    eprintln!(
        "exact checks: {}/{} pass; stat tests: {}/{} non-reject; overall_pass: {}",
        merged.exact_checks.iter().filter(|c| c.pass).count(),
        merged.exact_checks.len(),
        merged.stat_tests.len() - rejected,
        merged.stat_tests.len(),
        merged.overall_pass
    );
    let report = CliReport {
        config,
        exact_checks: merged.exact_checks,
        stat_tests: merged.stat_tests,
        overall_pass: merged.overall_pass,
    };
    write_output(out, &to_json(&report))?;
    Ok(if report.overall_pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    })
}
