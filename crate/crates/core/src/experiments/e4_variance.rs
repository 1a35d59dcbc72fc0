//! Logarithmic growth of `Var phi_T` in two dimensions.

use serde::{Deserialize, Serialize};

use super::common::{coefficients, collect};
use super::report::{Check, ExperimentReport};
use super::runner::RunContext;
use super::spec::ExperimentSpec;
use crate::elliptic::modified_corrector_with_guess;
use crate::lattice::ScalarField;
use crate::statistics::{linear_fit, mean_estimate};
use crate::{Error, Result};

pub const MIN_R_SQUARED: f64 = 0.9;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Sample {
    variance: Vec<f64>,
}

pub fn run(spec: &ExperimentSpec, ctx: &RunContext) -> Result<ExperimentReport> {
    let grid = spec.grid()?;
    let ts = spec.ladder.t.clone();
    let mut report = ExperimentReport::new(spec);
    let out = collect(spec, ctx, &mut report, |index| {
        let a = coefficients(spec, &grid, index)?;
        let mut guess: Option<ScalarField> = None;
        let mut variance = Vec::with_capacity(ts.len());
        for &t in &ts {
            let c = modified_corrector_with_guess(&a, t, 0, &spec.solver, guess.as_ref())?;
            let m = c.phi.mean();
            let n = grid.sites() as f64;
            variance.push(c.phi.values().iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n);
            guess = Some(c.phi);
        }
        Ok(Sample { variance })
    })?;
    if out.is_empty() {
        return Err(Error::Consistency("every sample failed".into()));
    }
    let n = out.len();
    let mut ys = Vec::new();
    for (k, &t) in ts.iter().enumerate() {
        let v: Vec<f64> = out.values().map(|s| s.variance[k]).collect();
        let e = mean_estimate(&v);
        report.rung("phi_variance", t, e.value, e.stderr, n);
        ys.push(e.value);
    }
    let logs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let fit = linear_fit(&logs, &ys)?;
    report.value("variance_per_log_t", fit.slope);
    report.checks.push(Check::flag(
        "variance_increasing",
        fit.slope > 0.0,
        "fitted slope of Var phi_T against log T",
    ));
    report.checks.push(Check::at_least(
        "log_fit_r_squared",
        fit.r_squared,
        MIN_R_SQUARED,
        "linear fit of Var phi_T against log T",
    ));
    report.finish();
    Ok(report)
}
