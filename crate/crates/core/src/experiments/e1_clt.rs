//! CLT scaling of Gaussian averages of `grad phi_T`, `grad sigma_T`, `q_T`.

use serde::{Deserialize, Serialize};

use super::common::{coefficients, collect};
use super::report::{Check, ExperimentReport, FitCheck};
use super::runner::RunContext;
use super::spec::ExperimentSpec;
use crate::elliptic::assemble_extended_corrector;
use crate::lattice::{discrete_gradient, mollified_at_origin, ScalarField, SkewField};
use crate::statistics::CltProfile;
use crate::Result;

pub const SLOPE_TOLERANCE: f64 = 0.15;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Sample {
    /// `origin[field][scale]`
    origin: Vec<Vec<f64>>,
    helmholtz: f64,
}

pub fn field_names(dim: usize) -> Vec<String> {
    let mut names: Vec<String> = (0..dim).map(|i| format!("grad_phi_{i}")).collect();
    for (j, k) in SkewField::pairs(dim) {
        names.extend((0..dim).map(|i| format!("grad_sigma_{j}{k}_{i}")));
    }
    names.extend((0..dim).map(|i| format!("q_{i}")));
    names
}

pub fn run(spec: &ExperimentSpec, ctx: &RunContext) -> Result<ExperimentReport> {
    let grid = spec.grid()?;
    let t = spec.cutoff()?;
    let scales = spec.ladder.r.clone();
    let mut report = ExperimentReport::new(spec);
    let out = collect(spec, ctx, &mut report, |index| {
        let a = coefficients(spec, &grid, index)?;
        let c = assemble_extended_corrector(&a, t, 0, &spec.solver)?;
        let mut fields: Vec<Vec<f64>> = discrete_gradient(&c.phi).into_components();
        for comp in c.sigma.components() {
            let s = ScalarField::from_raw(grid, comp.clone());
            fields.extend(discrete_gradient(&s).into_components());
        }
        fields.extend(c.flux.into_components());
        let origin = fields
            .iter()
            .map(|f| mollified_at_origin(&grid, f, &scales))
            .collect::<Result<Vec<_>>>()?;
        Ok(Sample {
            origin,
            helmholtz: c.residuals.helmholtz,
        })
    })?;

    let names = field_names(spec.dim);
    let n = out.len();
    let max_helmholtz = out.values().map(|s| s.helmholtz).fold(0.0, f64::max);
    report.value("max_helmholtz_residual", max_helmholtz);
    let mut degenerate = true;
    let mut profiles = Vec::new();
    for (f, name) in names.iter().enumerate() {
        let values: Vec<Vec<f64>> = out.values().map(|s| s.origin[f].clone()).collect();
        let p = CltProfile::from_origin_values(&scales, &values)?;
        for (r, (s, e)) in scales.iter().zip(p.std.iter().zip(&p.stderr)) {
            report.rung(&format!("std_{name}"), *r, *s, *e, n);
        }
        degenerate &= p.is_degenerate();
        profiles.push(p);
    }
    report.degenerate = degenerate;
    if degenerate {
        report.checks.push(Check::flag(
            "degenerate_ensemble",
            true,
            "all Gaussian averages are deterministic",
        ));
    } else {
        let target = -(spec.dim as f64) / 2.0;
        for (name, p) in names.iter().zip(&profiles) {
            report.fits.push(FitCheck::slope(
                format!("slope_{name}"),
                p.fit()?,
                target,
                SLOPE_TOLERANCE,
            ));
        }
    }
    report.finish();
    Ok(report)
}
