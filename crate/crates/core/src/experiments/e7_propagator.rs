//! Gaussian-averaged size of `q(T) - S^hom_{t -> T} q(t)` along a `t` ladder.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::common::{coefficients, collect, root_mean, PILOT_OFFSET};
use super::report::{Check, ExperimentReport};
use super::runner::RunContext;
use super::spec::ExperimentSpec;
use crate::elliptic::{a_ht_kappa, unit_vector};
use crate::lattice::mollified_at_origin;
use crate::parabolic::{propagate_s_hom, Stepper, TimeGrid};
use crate::{Error, Result};

/// Richardson order of the pilot estimate of `a_hom`.
pub const PILOT_KAPPA: usize = 2;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Sample {
    magnitude: Vec<f64>,
}

/// Symmetrized mean of `a_hT^kappa` over the pilot realizations.
fn pilot_coefficient(spec: &ExperimentSpec, t: f64) -> Result<(DMatrix<f64>, Vec<u64>)> {
    let grid = spec.grid()?;
    let d = spec.dim;
    let indices: Vec<u64> = (0..spec.pilot_samples as u64).map(|k| PILOT_OFFSET + k).collect();
    let mut m = DMatrix::zeros(d, d);
    for &i in &indices {
        m += a_ht_kappa(&coefficients(spec, &grid, i)?, t, PILOT_KAPPA, &spec.solver)?;
    }
    m /= indices.len() as f64;
    Ok(((&m + m.transpose()) * 0.5, indices))
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn run(spec: &ExperimentSpec, ctx: &RunContext) -> Result<ExperimentReport> {
    let grid = spec.grid()?;
    let d = spec.dim;
    let big_t = spec.cutoff()?;
    let radius = spec.ladder.r[0];
    let ts = spec.ladder.t.clone();
    let (a_hom, pilots) = pilot_coefficient(spec, big_t)?;
    let mut report = ExperimentReport::new(spec);
    for (i, v) in a_hom.iter().enumerate() {
        report.value(format!("pilot_a_hom_{}{}", i % d, i / d), *v);
    }
    let out = collect(spec, ctx, &mut report, |index| {
        let a = coefficients(spec, &grid, index)?;
        let q0 = a.flux_of_constant(&unit_vector(d, 0));
        let mut s = Stepper::new(&a, q0, 0.0, TimeGrid::new(spec.steps_per_dyad)?, &spec.solver)?;
        let mut snapshots = Vec::with_capacity(ts.len());
        for &t in &ts {
            s.advance_to(t)?;
            snapshots.push(s.flux().clone());
        }
        s.advance_to(big_t)?;
        let q_end = s.flux();
        let magnitude = ts
            .iter()
            .zip(&snapshots)
            .map(|(&t, q)| {
                let f = q_end.axpy(-1.0, &propagate_s_hom(&a_hom, q, t, big_t)?);
                let mut sq = 0.0;
                for c in f.components() {
                    sq += mollified_at_origin(&grid, c, &[radius])?[0].powi(2);
                }
                Ok(sq.sqrt())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Sample { magnitude })
    })?;
    report.seeds.pilot_indices = pilots;
    if out.is_empty() {
        return Err(Error::Consistency("every sample failed".into()));
    }
    let n = out.len();
    let mut medians = Vec::new();
    for (k, &t) in ts.iter().enumerate() {
        let mut m: Vec<f64> = out.values().map(|s| s.magnitude[k]).collect();
        let sq: Vec<f64> = m.iter().map(|x| x * x).collect();
        let rms = root_mean(&sq);
        report.rung("rms_magnitude", t, rms.value, rms.stderr, n);
        let med = median(&mut m);
        // Normal-theory standard error of the median.
        let se = (std::f64::consts::PI / 2.0).sqrt() * rms.value / (n as f64).sqrt();
        report.rung("median_magnitude", t, med, se, n);
        medians.push(med);
    }
    let decreasing = medians.windows(2).all(|w| w[1] < w[0]);
    report.checks.push(Check::flag(
        "median_strictly_decreasing",
        decreasing,
        format!("medians {medians:?}"),
    ));
    report.finish();
    Ok(report)
}
