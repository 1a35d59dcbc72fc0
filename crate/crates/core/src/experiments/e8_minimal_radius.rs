//! Empirical tail of the minimal radius `r*`.

use serde::{Deserialize, Serialize};

use super::common::{coefficients, collect};
use super::report::{Check, ExperimentReport};
use super::runner::RunContext;
use super::spec::ExperimentSpec;
use crate::elliptic::{dyadic_radii, minimal_radius, modified_corrector, vector_potential};
use crate::{Error, Result};

/// Tail points need at least this many samples with `r* >= r`.
pub const MIN_TAIL_COUNT: usize = 10;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Sample {
    radius: usize,
    capped: bool,
}

pub fn run(spec: &ExperimentSpec, ctx: &RunContext) -> Result<ExperimentReport> {
    let grid = spec.grid()?;
    let t = spec.cutoff()?;
    let mut report = ExperimentReport::new(spec);
    let out = collect(spec, ctx, &mut report, |index| {
        let a = coefficients(spec, &grid, index)?;
        let c = modified_corrector(&a, t, 0, &spec.solver)?;
        let sigma = vector_potential(&c.flux, t)?;
        let r = minimal_radius(&c.phi, &sigma, spec.delta)?;
        Ok(Sample {
            radius: r.radius,
            capped: r.capped,
        })
    })?;
    if out.is_empty() {
        return Err(Error::Consistency("every sample failed".into()));
    }
    let n = out.len();
    let capped = out.values().filter(|s| s.capped).count();
    report.value("capped_fraction", capped as f64 / n as f64);
    let d = spec.dim as i32;
    let mut tail = Vec::new();
    for r in dyadic_radii(&grid) {
        let count = out.values().filter(|s| s.radius >= r).count();
        let p = count as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        report.rung("tail_probability", r as f64, p, se, n);
        if count >= MIN_TAIL_COUNT {
            tail.push((r as f64, p));
        }
    }
    // Decay at least linear in r^d means log P drops by a positive multiple
    // of the increment in r^d; report the worst-case constant.
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for w in tail.windows(2) {
        let drop = w[0].1.ln() - w[1].1.ln();
        if drop <= 0.0 {
            ok = false;
        } else {
            worst = worst.max((w[1].0.powi(d) - w[0].0.powi(d)) / drop);
        }
    }
    report.value("tail_constant", worst);
    report.checks.push(Check::flag(
        "log_tail_decreasing",
        ok,
        format!("{} tail points with count >= {MIN_TAIL_COUNT}", tail.len()),
    ));
    report.finish();
    Ok(report)
}
