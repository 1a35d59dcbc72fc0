//! The `homlab` command-line front end.
//!
//! Exit codes: 0 when the experiment passes, 2 when it ran but a statistical
//! check failed, 1 on any error.

mod config;
mod render;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{RunConfig, WORKERS_ENV};
pub use render::{field_csv, field_summary, report_csv, report_table};

use crate::elliptic::{assemble_extended_corrector, bundle, SolverConfig};
use crate::ensembles::{sample, EnsembleKind, EnsembleSpec};
use crate::experiments::{read_report, run_experiment, RunOptions};
use crate::lattice::{io::read_planes, TorusGrid};
use crate::{Error, Result};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_STAT_FAIL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "homlab", version, about = "Quantitative homogenization experiments on a periodic lattice")]
pub struct Cli {
    /// Log filter, e.g. `info` or `homlab=debug`.
    #[arg(long, global = true)]
    pub log_level: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the experiment described by a TOML config.
    Run(RunArgs),
    /// Solve one extended corrector and write its bundle.
    Corrector(CorrectorArgs),
    /// Summarize a finished run directory.
    Report(ReportArgs),
    /// Print a lattice field file.
    DumpField(DumpArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub config: PathBuf,
    /// Override a key, `section.key=value`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Continue from the samples checkpoint of an earlier run.
    #[arg(long)]
    pub resume: bool,
}

#[derive(Debug, Args)]
pub struct CorrectorArgs {
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 64)]
    pub side: usize,
    #[arg(long, value_parser = parse_kind, default_value = "bernoulli")]
    pub ensemble: EnsembleKind,
    #[arg(long, default_value_t = crate::ensembles::DEFAULT_LAMBDA)]
    pub lambda: f64,
    #[arg(long, default_value_t = crate::ensembles::DEFAULT_P)]
    pub p: f64,
    #[arg(long)]
    pub block_size: Option<usize>,
    /// Cutoff `T`; `inf` for the periodic corrector.
    #[arg(long, value_parser = parse_cutoff)]
    pub t: f64,
    #[arg(long, default_value_t = 0)]
    pub direction: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub index: u64,
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    pub run_dir: PathBuf,
    /// Print only the CSV blocks.
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, Args)]
pub struct DumpArgs {
    pub file: PathBuf,
    /// One row per site instead of the summary.
    #[arg(long)]
    pub csv: bool,
}

fn parse_kind(s: &str) -> std::result::Result<EnsembleKind, String> {
    serde_json::from_value(serde_json::Value::String(s.to_lowercase()))
        .map_err(|_| format!("unknown ensemble `{s}` (bernoulli, uniform, block)"))
}

fn parse_cutoff(s: &str) -> std::result::Result<f64, String> {
    match s.trim().to_lowercase().as_str() {
        "inf" | "infinity" => Ok(f64::INFINITY),
        v => v.parse().map_err(|_| format!("cutoff must be a number or `inf`, got `{s}`")),
    }
}

fn init_logging(level: &str) {
    let _ = env_logger::Builder::new().parse_filters(level).try_init();
}

fn cmd_run(args: &RunArgs, log_level: Option<&str>) -> Result<i32> {
    let cfg = RunConfig::load(&args.config, &args.overrides)?;
    init_logging(log_level.unwrap_or(&cfg.log_level));
    let opts = RunOptions {
        workers: args.workers.unwrap_or(cfg.workers),
        output_dir: args.output_dir.clone().unwrap_or(cfg.output_dir),
        resume: args.resume,
    };
    if opts.workers == 0 {
        return Err(Error::Config("workers must be >= 1".into()));
    }
    let out = run_experiment(&cfg.experiment, &opts)?;
    print!("{}", report_table(&out.report));
    println!("run directory: {}", out.run_dir.display());
    Ok(if out.report.passed { EXIT_PASS } else { EXIT_STAT_FAIL })
}

fn cmd_corrector(args: &CorrectorArgs) -> Result<i32> {
    let grid = TorusGrid::new(args.dim, args.side)?;
    let ensemble = EnsembleSpec {
        kind: args.ensemble,
        lambda: args.lambda,
        p: args.p,
        block_size: args.block_size,
    };
    let a = sample(&ensemble, &grid, args.seed, args.index)?;
    let cfg = SolverConfig::with_tolerance(args.tolerance);
    let c = assemble_extended_corrector(&a, args.t, args.direction, &cfg)?;
    bundle::write_bundle(&args.out, &c, &a, &ensemble, args.seed, args.index)?;
    println!("corrector residual: {:.3e}", c.residuals.corrector);
    println!("helmholtz residual: {:.3e}", c.residuals.helmholtz);
    println!(
        "a_hT e_{}: [{}]",
        args.direction,
        c.a_ht_column
            .iter()
            .map(|v| format!("{v:.10}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
    println!("iterations: {}", c.report.iterations);
    println!("bundle: {}", args.out.display());
    Ok(EXIT_PASS)
}

fn cmd_report(args: &ReportArgs) -> Result<i32> {
    let report = read_report(&args.run_dir)?;
    if args.csv {
        print!("{}", report_csv(&report));
    } else {
        print!("{}", report_table(&report));
    }
    Ok(EXIT_PASS)
}

fn cmd_dump(args: &DumpArgs) -> Result<i32> {
    let (grid, planes) = read_planes(&args.file)?;
    if args.csv {
        print!("{}", field_csv(&grid, &planes));
    } else {
        print!("{}", field_summary(&grid, &planes));
    }
    Ok(EXIT_PASS)
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    if !matches!(cli.command, Command::Run(_)) {
        init_logging(cli.log_level.as_deref().unwrap_or("warn"));
    }
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a, cli.log_level.as_deref()),
        Command::Corrector(a) => cmd_corrector(a),
        Command::Report(a) => cmd_report(a),
        Command::DumpField(a) => cmd_dump(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
