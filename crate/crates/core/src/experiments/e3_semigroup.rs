//! Decay of `grad u(T)` along the semigroup.

use serde::{Deserialize, Serialize};

use super::common::{coefficients, collect, root_mean};
use super::report::{Check, ExperimentReport, FitCheck};
use super::runner::RunContext;
use super::spec::ExperimentSpec;
use crate::lattice::discrete_gradient;
use crate::parabolic::evolve_semigroup;
use crate::statistics::rate_fit;
use crate::{Error, Result};

pub const SLOPE_TOLERANCE: f64 = 0.2;
pub const FLUX_DEFECT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Sample {
    grad_sq: Vec<f64>,
    flux_defect: f64,
}

pub fn run(spec: &ExperimentSpec, ctx: &RunContext) -> Result<ExperimentReport> {
    let grid = spec.grid()?;
    let ts = spec.ladder.t.clone();
    let t_max = ts.iter().cloned().fold(0.0, f64::max);
    let mut report = ExperimentReport::new(spec);
    let out = collect(spec, ctx, &mut report, |index| {
        let a = coefficients(spec, &grid, index)?;
        let traj = evolve_semigroup(&a, 0, t_max, spec.steps_per_dyad, &spec.solver)?;
        let n = grid.sites() as f64;
        let grad_sq = ts
            .iter()
            .map(|&t| {
                let k = traj.index_of(t)?;
                Ok(discrete_gradient(&traj.u[k]).norm2().powi(2) / n)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Sample {
            grad_sq,
            flux_defect: traj.max_flux_defect(),
        })
    })?;
    if out.is_empty() {
        return Err(Error::Consistency("every sample failed".into()));
    }
    let n = out.len();
    let mut ys = Vec::new();
    for (k, &t) in ts.iter().enumerate() {
        let g: Vec<f64> = out.values().map(|s| s.grad_sq[k]).collect();
        let e = root_mean(&g);
        report.rung("grad_u_rms", t, e.value, e.stderr, n);
        ys.push(e.value);
    }
    report.fits.push(FitCheck::slope(
        "grad_u_slope",
        rate_fit(&ts, &ys)?,
        -(1.0 + spec.dim as f64 / 4.0),
        SLOPE_TOLERANCE,
    ));
    let defect = out.values().map(|s| s.flux_defect).fold(0.0, f64::max);
    report.checks.push(Check::at_most(
        "flux_defect",
        defect,
        FLUX_DEFECT_TOLERANCE,
        "max |div q - v| along the trajectory",
    ));
    report.finish();
    Ok(report)
}
