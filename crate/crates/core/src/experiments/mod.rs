//! Named Monte Carlo experiments, their scheduler and run artifacts.

mod common;
pub mod e1_clt;
pub mod e2_richardson;
pub mod e3_semigroup;
pub mod e4_variance;
pub mod e5_commutator;
pub mod e6_two_scale;
pub mod e7_propagator;
pub mod e8_minimal_radius;
mod report;
mod runner;
mod spec;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use common::PILOT_OFFSET;
pub use report::{Check, ExperimentReport, FitCheck, Rung, SampleFailure, SeedManifest};
pub use runner::{run_samples, schedule, Collected, RunContext, WorkPlan};
pub use spec::{ExperimentName, ExperimentSpec, Ladder, MIN_SAMPLES};

use crate::{Error, Result};

pub const REPORT_FILE: &str = "report.json";
pub const SEEDS_FILE: &str = "seeds.json";
pub const TIMING_FILE: &str = "timing.json";
pub const CHECKPOINT_FILE: &str = "samples.jsonl";
pub const CSV_DIR: &str = "csv";

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub workers: usize,
    pub output_dir: PathBuf,
    /// Reuse finished samples from an existing checkpoint.
    pub resume: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_seconds: f64,
    pub workers: usize,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: ExperimentReport,
    pub run_dir: PathBuf,
    pub timing: Timing,
}

/// `<output_dir>/<name>-<first 12 hex digits of the spec hash>`.
pub fn run_dir(spec: &ExperimentSpec, output_dir: &Path) -> PathBuf {
    output_dir.join(format!("{}-{}", spec.name, &spec.hash()[..12]))
}

/// Computes the report without touching the filesystem.
pub fn evaluate(spec: &ExperimentSpec, ctx: &RunContext) -> Result<ExperimentReport> {
    spec.validate()?;
    match spec.name {
        ExperimentName::CltDecay => e1_clt::run(spec, ctx),
        ExperimentName::SystematicError => e2_richardson::run(spec, ctx),
        ExperimentName::SemigroupDecay => e3_semigroup::run(spec, ctx),
        ExperimentName::CorrectorGrowth => e4_variance::run(spec, ctx),
        ExperimentName::CommutatorGaussianity => e5_commutator::run(spec, ctx),
        ExperimentName::TwoScale => e6_two_scale::run(spec, ctx),
        ExperimentName::PropagatorError => e7_propagator::run(spec, ctx),
        ExperimentName::MinimalRadius => e8_minimal_radius::run(spec, ctx),
    }
}

/// Runs `spec` and writes the report, CSV blocks, seed manifest and timing
/// into the run directory.
pub fn run_experiment(spec: &ExperimentSpec, opts: &RunOptions) -> Result<RunOutcome> {
    spec.validate()?;
    let dir = run_dir(spec, &opts.output_dir);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let checkpoint = dir.join(CHECKPOINT_FILE);
    if !opts.resume && checkpoint.exists() {
        fs::remove_file(&checkpoint).map_err(|e| Error::io(&checkpoint, e))?;
    }
    let ctx = RunContext {
        workers: opts.workers,
        checkpoint: Some(checkpoint),
    };
    let start = Instant::now();
    let report = evaluate(spec, &ctx)?;
    let timing = Timing {
        wall_seconds: start.elapsed().as_secs_f64(),
        workers: opts.workers,
    };
    write_json(&dir.join(REPORT_FILE), &report)?;
    write_json(&dir.join(SEEDS_FILE), &report.seeds)?;
    write_json(&dir.join(TIMING_FILE), &timing)?;
    let csv_dir = dir.join(CSV_DIR);
    fs::create_dir_all(&csv_dir).map_err(|e| Error::io(&csv_dir, e))?;
    for block in report.csv_blocks() {
        let path = csv_dir.join(format!("{}.csv", block.name));
        fs::write(&path, block.render()).map_err(|e| Error::io(&path, e))?;
    }
    Ok(RunOutcome {
        report,
        run_dir: dir,
        timing,
    })
}

pub fn read_report(dir: &Path) -> Result<ExperimentReport> {
    let path = dir.join(REPORT_FILE);
    let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
    Ok(serde_json::from_slice(&bytes)?)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s).map_err(|e| Error::io(path, e))
}
