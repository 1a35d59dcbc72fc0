//! Gaussianity, local independence and stationarity of the commutator
//! `Xi(t) e = q(t) - abar (grad phi(t) + e)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::common::{coefficients, collect};
use super::report::{Check, ExperimentReport};
use super::runner::RunContext;
use super::spec::ExperimentSpec;
use crate::elliptic::{unit_vector, SolverConfig};
use crate::ensembles::CoefficientField;
use crate::lattice::{discrete_gradient, TorusGrid, VectorField};
use crate::parabolic::{Stepper, TimeGrid};
use crate::statistics::{correlation, normality_report, CovarianceEstimate, TestFunction};
use crate::{Error, Result};

pub const Z_THRESHOLD: f64 = 4.0;

/// Integrals of one field against a bump, per component.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct BumpIntegrals {
    /// `int zeta q_{0,j}`
    q: Vec<f64>,
    /// `int zeta (grad phi_0 + e_0)_k`
    g: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Snapshot {
    /// `means[i]`: torus mean of `q_i`.
    means: Vec<Vec<f64>>,
    /// `bumps[r][center]` for direction 0.
    bumps: Vec<Vec<BumpIntegrals>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Sample {
    /// One snapshot at `t` and one at `4t`.
    snapshots: Vec<Snapshot>,
}

fn bumps(grid: &TorusGrid, radii: &[f64]) -> Vec<[TestFunction; 2]> {
    let d = grid.dim();
    let mut far = vec![0; d];
    far[0] = grid.side() / 2;
    radii
        .iter()
        .map(|&r| {
            let h = r as usize;
            [
                TestFunction::new(vec![0; d], h, unit_vector(d, 0)),
                TestFunction::new(far.clone(), h, unit_vector(d, 0)),
            ]
        })
        .collect()
}

fn component_integrals(zeta: &TestFunction, f: &VectorField) -> Result<Vec<f64>> {
    let support = zeta.support(f.grid())?;
    Ok(f.components()
        .iter()
        .map(|c| support.iter().map(|&(x, w)| w * c[x]).sum())
        .collect())
}

fn snapshots(
    a: &CoefficientField,
    times: &[f64],
    spd: usize,
    cfg: &SolverConfig,
    tests: &[[TestFunction; 2]],
) -> Result<Vec<Snapshot>> {
    let d = a.grid().dim();
    let mut out: Vec<Snapshot> = times
        .iter()
        .map(|_| Snapshot {
            means: Vec::new(),
            bumps: Vec::new(),
        })
        .collect();
    for i in 0..d {
        let e = unit_vector(d, i);
        let mut s = Stepper::new(a, a.flux_of_constant(&e), 0.0, TimeGrid::new(spd)?, cfg)?;
        for (k, &t) in times.iter().enumerate() {
            s.advance_to(t)?;
            out[k].means.push(s.flux().mean());
            if i == 0 {
                let minus_e: Vec<f64> = e.iter().map(|x| -x).collect();
                let g = discrete_gradient(s.psi()).shifted(&minus_e);
                out[k].bumps = tests
                    .iter()
                    .map(|pair| {
                        pair.iter()
                            .map(|z| {
                                Ok(BumpIntegrals {
                                    q: component_integrals(z, s.flux())?,
                                    g: component_integrals(z, &g)?,
                                })
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<_>>()?;
            }
        }
    }
    Ok(out)
}

/// `int zeta e_0 . Xi e_0`.
fn xi_integral(b: &BumpIntegrals, abar: &DMatrix<f64>) -> f64 {
    let ag: f64 = b.g.iter().enumerate().map(|(k, g)| abar[(0, k)] * g).sum();
    b.q[0] - ag
}

pub fn run(spec: &ExperimentSpec, ctx: &RunContext) -> Result<ExperimentReport> {
    let grid = spec.grid()?;
    let d = spec.dim;
    let t = spec.cutoff()?;
    let times = [t, 4.0 * t];
    let tests = bumps(&grid, &spec.ladder.r);
    let largest = (0..spec.ladder.r.len())
        .max_by(|&i, &j| spec.ladder.r[i].total_cmp(&spec.ladder.r[j]))
        .unwrap_or(0);
    for pair in &tests {
        pair[0].support(&grid)?;
    }
    let mut report = ExperimentReport::new(spec);
    let out = collect(spec, ctx, &mut report, |index| {
        let a = coefficients(spec, &grid, index)?;
        Ok(Sample {
            snapshots: snapshots(&a, &times, spec.steps_per_dyad, &spec.solver, &tests)?,
        })
    })?;
    if out.is_empty() {
        return Err(Error::Consistency("every sample failed".into()));
    }
    let n = out.len();
    let volume = grid.sites() as f64;
    let mut covariances = Vec::new();
    for (k, &tau) in times.iter().enumerate() {
        let mut abar = DMatrix::zeros(d, d);
        for s in out.values() {
            for (i, m) in s.snapshots[k].means.iter().enumerate() {
                for (j, v) in m.iter().enumerate() {
                    abar[(j, i)] += v / n as f64;
                }
            }
        }
        for (idx, v) in abar.iter().enumerate() {
            report.value(format!("abar_{}{}_t{tau}", idx % d, idx / d), *v);
        }
        // Torus mean of Xi e_0 is mean(q_0) - abar e_0.
        let xi_means: Vec<Vec<f64>> = out
            .values()
            .map(|s| {
                let m = &s.snapshots[k].means[0];
                (0..d).map(|j| m[j] - abar[(j, 0)]).collect()
            })
            .collect();
        let centered = (0..d)
            .map(|j| xi_means.iter().map(|m| m[j]).sum::<f64>().abs() / n as f64)
            .fold(0.0, f64::max);
        report.value(format!("xi_mean_residual_t{tau}"), centered);
        let cov = CovarianceEstimate::from_means(&xi_means, volume, tau)?;
        for (idx, (v, e)) in cov.q_hat.iter().zip(cov.stderr.iter()).enumerate() {
            report.rung(&format!("q_hat_{}{}", idx % d, idx / d), tau, *v, *e, n);
        }
        covariances.push(cov);

        for (ri, &r) in spec.ladder.r.iter().enumerate() {
            let x: Vec<f64> = out
                .values()
                .map(|s| xi_integral(&s.snapshots[k].bumps[ri][0], &abar))
                .collect();
            let y: Vec<f64> = out
                .values()
                .map(|s| xi_integral(&s.snapshots[k].bumps[ri][1], &abar))
                .collect();
            let norm = normality_report(&x)?;
            report.rung(&format!("skewness_t{tau}"), r, norm.skewness.value, norm.skewness.stderr, n);
            report.rung(
                &format!("excess_kurtosis_t{tau}"),
                r,
                norm.excess_kurtosis.value,
                norm.excess_kurtosis.stderr,
                n,
            );
            report.rung(&format!("ks_distance_t{tau}"), r, norm.ks_distance.value, norm.ks_distance.stderr, n);
            let corr = correlation(&x, &y);
            report.rung(&format!("correlation_t{tau}"), r, corr.value, corr.stderr, n);
            if k == 0 && ri == largest {
                let gap = tests[ri][0].gap(&tests[ri][1], &grid);
                report.checks.push(Check::at_most(
                    format!("skewness_R{r}"),
                    norm.skewness.value.abs() / norm.skewness.stderr,
                    Z_THRESHOLD,
                    "|skewness| / stderr",
                ));
                report.checks.push(Check::at_most(
                    format!("excess_kurtosis_R{r}"),
                    norm.excess_kurtosis.value.abs() / norm.excess_kurtosis.stderr,
                    Z_THRESHOLD,
                    "|excess kurtosis| / stderr",
                ));
                report.checks.push(Check::at_most(
                    format!("correlation_R{r}"),
                    corr.value.abs() / corr.stderr,
                    Z_THRESHOLD,
                    format!("|corr| / stderr, supports {gap} apart"),
                ));
            }
        }
    }
    let z = covariances[0].max_z_against(&covariances[1]);
    report.checks.push(Check::at_most(
        "q_hat_stationarity",
        z,
        Z_THRESHOLD,
        format!("max |Q(t) - Q(4t)| / combined stderr, t = {t}"),
    ));
    let scale = covariances[0].stderr.iter().cloned().fold(0.0, f64::max);
    report.checks.push(Check::at_least(
        "q_hat_positive",
        covariances[0].min_eigenvalue(),
        -Z_THRESHOLD * scale,
        "smallest eigenvalue of Q(t)",
    ));
    report.finish();
    Ok(report)
}
