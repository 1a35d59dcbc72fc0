use super::runner::{run_samples, Collected, RunContext};
use super::report::ExperimentReport;
use super::spec::ExperimentSpec;
use crate::ensembles::{sample, CoefficientField};
use crate::lattice::TorusGrid;
use crate::statistics::{jackknife, mean_of, Estimate};
use crate::Result;

/// Offset separating pilot realizations from the main sample indices.
pub const PILOT_OFFSET: u64 = 1 << 32;

pub fn indices(spec: &ExperimentSpec) -> Vec<u64> {
    (0..spec.samples as u64).collect()
}

pub fn coefficients(spec: &ExperimentSpec, grid: &TorusGrid, index: u64) -> Result<CoefficientField> {
    sample(&spec.ensemble, grid, spec.master_seed, index)
}

/// Runs the per-sample work and records seeds and failures on the report.
pub fn collect<T, F>(
    spec: &ExperimentSpec,
    ctx: &RunContext,
    report: &mut ExperimentReport,
    work: F,
) -> Result<Collected<T>>
where
    T: serde::Serialize + serde::de::DeserializeOwned + Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    let idx = indices(spec);
    let out = run_samples(ctx, &idx, work)?;
    report.seeds.indices = idx;
    report.failures = out.failures.clone();
    Ok(out)
}

/// `sqrt(mean(x))` with a jackknife error.
pub fn root_mean(x: &[f64]) -> Estimate {
    jackknife(x.len(), |idx| mean_of(x, idx).sqrt())
}
