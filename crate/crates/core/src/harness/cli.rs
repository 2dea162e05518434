//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 validation
//! failure (inadmissible schedule, infeasible constraints), 3 runtime
//! failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::info;

use crate::error::{Error, Result};
use crate::harness::bench::{run_bench, CellStatus};
use crate::harness::config::{ProblemSection, RunConfig};
use crate::harness::generators::UpperSpec;
use crate::harness::metrics::{emit_metrics_csv, format_metrics_csv, read_metrics_csv};
use crate::harness::rate::fit_rate;
use crate::harness::svmlight::write_svmlight;
use crate::schedules::{rate_schedule, validate, PowerSchedule, DEFAULT_EPSILON, DEFAULT_R};
use crate::solver::reference::{solve_regularized_reference_with, ReferenceOptions};
use crate::solver::run_irig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::InvalidArgument(_) | Error::DimensionMismatch { .. } => EXIT_USAGE,
        Error::InvalidSchedule(_) | Error::Infeasible(_) => EXIT_VALIDATION,
        Error::NonFinite(_)
        | Error::Parse { .. }
        | Error::TooFewRows(_)
        | Error::NonPositiveGaps { .. }
        | Error::Io { .. } => EXIT_RUNTIME,
    }
}

#[derive(Debug, Parser)]
#[command(name = "irig", version, about = "Incremental regularized subgradient solver for simple bilevel problems")]
pub struct Cli {
    /// More logging (-v info, -vv debug). RUST_LOG overrides.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the solver and write the metrics CSV.
    Solve {
        #[arg(short, long)]
        config: PathBuf,
        /// Output CSV; `-` prints to stdout. Overrides `run.output`.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(short = 'n', long)]
        iterations: Option<usize>,
    },
    /// Check a schedule against the admissibility conditions.
    Validate(ValidateArgs),
    /// Solve the regularized single-level problem for a fixed lambda.
    Reference {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        lambda: f64,
        #[arg(long, default_value_t = 100_000)]
        iters: usize,
        #[arg(long, default_value_t = 1.0)]
        step_scale: f64,
    },
    /// Fit the log-log decay rate of f_gap in a metrics CSV.
    RateFit {
        csv: PathBuf,
        #[arg(long, default_value_t = 0.2)]
        burn_in: f64,
    },
    /// Materialize a problem: svmlight data for dataset kinds, an expanded
    /// config for analytic kinds.
    Gen {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Sweep the `[bench]` grid.
    Bench {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Take the schedule and problem from a config file.
    #[arg(short, long, conflicts_with_all = ["m", "mu_h"])]
    pub config: Option<PathBuf>,
    #[arg(long, required_unless_present = "config")]
    pub m: Option<usize>,
    #[arg(long, required_unless_present = "config")]
    pub mu_h: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub gamma0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda0: f64,
    #[arg(long, conflicts_with_all = ["a", "b"])]
    pub epsilon: Option<f64>,
    #[arg(long, requires = "b")]
    pub a: Option<f64>,
    #[arg(long, requires = "a")]
    pub b: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_R)]
    pub r: f64,
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    init_logging(cli.verbose);
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("irig: {e}");
            exit_code(&e)
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Solve { config, out, iterations } => solve(&config, out, iterations),
        Command::Validate(args) => validate_cmd(args),
        Command::Reference { config, lambda, iters, step_scale } => reference(&config, lambda, iters, step_scale),
        Command::RateFit { csv, burn_in } => {
            let fit = fit_rate(&read_metrics_csv(&csv)?, burn_in)?;
            println!("slope={:.6} intercept={:.6} rows={}", fit.slope, fit.intercept, fit.rows);
            Ok(EXIT_OK)
        }
        Command::Gen { config, out } => generate(&config, &out),
        Command::Bench { config, out_dir, threads } => bench(&config, out_dir, threads),
    }
}

fn solve(config: &Path, out: Option<PathBuf>, iterations: Option<usize>) -> Result<i32> {
    let cfg = RunConfig::from_path(config)?;
    let mut run = cfg.resolve()?;
    if let Some(n) = iterations {
        run.iterations = n;
    }
    let output = out.or(run.output.take());
    let result = run_irig(&run.problem, &run.schedule, run.iterations, &run.x0, &run.options)?;
    match output.as_deref() {
        Some(p) if p == Path::new("-") => print!("{}", format_metrics_csv(&result.trace)),
        Some(p) => {
            emit_metrics_csv(&result.trace, p)?;
            info!("wrote {}", p.display());
            print_final(&result.trace);
        }
        None => print_final(&result.trace),
    }
    Ok(EXIT_OK)
}

fn print_final(trace: &crate::solver::Trace) {
    if let Some(r) = trace.rows.last() {
        let opt = |v: Option<f64>| v.map(|v| format!("{v:.6e}")).unwrap_or_else(|| "-".into());
        println!(
            "k={} f_bar={:.6e} f_gap={} h_bar={:.6e} dist_xstar={}",
            r.k,
            r.f_bar,
            opt(r.f_gap),
            r.h_bar,
            opt(r.dist_xstar)
        );
    }
}

fn validate_cmd(args: ValidateArgs) -> Result<i32> {
    let (schedule, m, mu_h): (PowerSchedule, usize, f64) = match &args.config {
        Some(path) => {
            let cfg = RunConfig::from_path(path)?;
            let p = cfg.build_instance()?;
            (cfg.build_schedule(p.m(), p.mu_h())?, p.m(), p.mu_h())
        }
        None => {
            let (m, mu_h) = (args.m.unwrap_or(1), args.mu_h.unwrap_or(1.0));
            let s = match (args.a, args.b) {
                (Some(a), Some(b)) => PowerSchedule::new(args.gamma0, args.lambda0, a, b, args.r)?,
                _ => rate_schedule(args.epsilon.unwrap_or(DEFAULT_EPSILON), args.gamma0, args.lambda0, args.r)?,
            };
            (s, m, mu_h)
        }
    };
    let report = validate(&schedule, m, mu_h)?;
    println!(
        "gamma0={} lambda0={} a={} b={} r={} m={m} mu_h={mu_h}",
        schedule.gamma0, schedule.lambda0, schedule.a, schedule.b, schedule.r
    );
    if report.is_ok() {
        println!("ok");
        Ok(EXIT_OK)
    } else {
        for v in &report.violations {
            println!("violation {}: {v}", v.code());
        }
        Ok(EXIT_VALIDATION)
    }
}

fn reference(config: &Path, lambda: f64, iters: usize, step_scale: f64) -> Result<i32> {
    let cfg = RunConfig::from_path(config)?;
    let p = cfg.build_instance()?;
    let opts = ReferenceOptions { step_scale, ..Default::default() };
    let x = solve_regularized_reference_with(&p, lambda, iters, &opts)?;
    println!("f={:.16e}", p.lower_value(&x)?);
    println!("h={:.16e}", p.upper_value(&x)?);
    let coords: Vec<String> = x.iter().map(|v| format!("{v:.16e}")).collect();
    println!("x={}", coords.join(","));
    Ok(EXIT_OK)
}

fn generate(config: &Path, out: &Path) -> Result<i32> {
    let cfg = RunConfig::from_path(config)?;
    match cfg.problem.kind.as_str() {
        "classification" | "svmlight" => {
            let d = cfg.load_dataset()?;
            write_svmlight(&d, out)?;
            println!("wrote {} samples of dimension {} to {}", d.len(), d.dim(), out.display());
        }
        _ => {
            // Builds the problem first so infeasible specs are rejected.
            let p = cfg.build_instance()?;
            let expanded = RunConfig {
                problem: expand_problem(&cfg.problem)?,
                ..cfg.clone()
            };
            let mut text = expanded.to_toml_string()?;
            if let Some(x) = p.known_x_h_star() {
                let coords: Vec<String> = x.iter().map(|v| v.to_string()).collect();
                text = format!("# x_h_star = [{}]\n{text}", coords.join(", "));
            }
            std::fs::write(out, text).map_err(|e| Error::io(out, e))?;
            println!("wrote {}", out.display());
        }
    }
    Ok(EXIT_OK)
}

/// Replaces presets and defaults with explicit keys.
fn expand_problem(p: &ProblemSection) -> Result<ProblemSection> {
    let spec_upper = match p.kind.as_str() {
        "selection" => p.selection_spec()?.upper,
        _ => p.constrained_spec()?.upper,
    };
    let (upper, center, mu) = match spec_upper {
        UpperSpec::Shifted { center, mu } => ("shifted", Some(center), mu),
        UpperSpec::ElasticNet { mu } => ("elastic-net", None, mu),
    };
    let mut e = ProblemSection {
        kind: p.kind.clone(),
        upper: Some(upper.into()),
        center,
        mu: Some(mu),
        ..Default::default()
    };
    if p.kind == "selection" {
        let s = p.selection_spec()?;
        e.dim = Some(s.dim);
        e.half_width = Some(s.half_width);
        e.zero_coords = Some(s.zero_coords);
        e.multiplicity = Some(s.multiplicity);
    } else {
        let s = p.constrained_spec()?;
        let (normals, offsets) = s.constraints.into_iter().unzip();
        e.normals = Some(normals);
        e.offsets = Some(offsets);
        e.lower = Some(s.lower);
        e.upper_bounds = Some(s.upper_bounds);
    }
    Ok(e)
}

fn bench(config: &Path, out_dir: Option<PathBuf>, threads: Option<usize>) -> Result<i32> {
    let mut cfg = RunConfig::from_path(config)?;
    let mut section = cfg.bench.take().unwrap_or_default();
    if threads.is_some() {
        section.threads = threads;
    }
    let dir = out_dir
        .or_else(|| section.output_dir.as_ref().map(|d| cfg.resolve_path(d)))
        .unwrap_or_else(|| PathBuf::from("bench_out"));
    cfg.bench = Some(section);
    let results = run_bench(&cfg, &dir)?;
    let count = |f: fn(&CellStatus) -> bool| results.iter().filter(|r| f(&r.status)).count();
    let ok = count(|s| matches!(s, CellStatus::Done { .. }));
    let rejected = count(|s| matches!(s, CellStatus::Rejected(_)));
    let failed = count(|s| matches!(s, CellStatus::Failed(_)));
    println!("cells={} ok={ok} rejected={rejected} failed={failed} dir={}", results.len(), dir.display());
    Ok(if failed > 0 {
        EXIT_RUNTIME
    } else if rejected > 0 {
        EXIT_VALIDATION
    } else {
        EXIT_OK
    })
}
