//! Convergence of `grad phi_T^kappa` and `a_hT^kappa` against a high-order
//! reference at the largest cutoff.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::common::{coefficients, collect};
use super::report::{ExperimentReport, FitCheck};
use super::runner::RunContext;
use super::spec::ExperimentSpec;
use crate::elliptic::{modified_corrector_with_guess, quadratic_form, richardson_extrapolate};
use crate::lattice::{discrete_gradient, ScalarField, VectorField};
use crate::statistics::{jackknife, mean_of, rate_fit};
use crate::{Error, Result};

pub const REFERENCE_KAPPA: usize = 3;
pub const GRADIENT_TOLERANCE: f64 = 0.15;
pub const COEFFICIENT_TOLERANCE: f64 = 0.25;

/// Synthetic model used by `dry_run`.
pub const DRY_RUN_MODEL: (f64, f64) = (0.5, 2.0);

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Sample {
    /// `grad[kappa slot][t slot]`: spatial mean of the squared gradient error,
    /// averaged over directions.
    grad: Vec<Vec<f64>>,
    /// `a_diff[kappa slot][t slot]`: entries of `a_hT^kappa - a_ref`, column-major.
    a_diff: Vec<Vec<Vec<f64>>>,
    a_ref: Vec<f64>,
}

/// Cutoffs needed for every `(T, kappa)` plus the reference.
fn cutoffs(spec: &ExperimentSpec, t_ref: f64) -> Vec<f64> {
    let mut set = BTreeMap::new();
    let mut add = |t: f64, k: usize| {
        for j in 0..k {
            let s = t * (1u64 << j) as f64;
            set.insert(s.to_bits(), s);
        }
    };
    for &t in &spec.ladder.t {
        for &k in &spec.ladder.kappa {
            add(t, k);
        }
    }
    add(t_ref, REFERENCE_KAPPA);
    let mut v: Vec<f64> = set.into_values().collect();
    v.sort_by(f64::total_cmp);
    v
}

fn pick<'a>(phis: &'a BTreeMap<u64, Vec<ScalarField>>, t: f64, kappa: usize, dir: usize) -> Result<ScalarField> {
    let rungs: Vec<ScalarField> = (0..kappa)
        .map(|j| phis[&(t * (1u64 << j) as f64).to_bits()][dir].clone())
        .collect();
    richardson_extrapolate(&rungs, kappa)
}

fn mean_sq_diff(a: &VectorField, b: &VectorField) -> f64 {
    let n = a.grid().sites() as f64;
    a.components()
        .iter()
        .zip(b.components())
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>())
        .sum::<f64>()
        / n
}

pub fn run(spec: &ExperimentSpec, ctx: &RunContext) -> Result<ExperimentReport> {
    if spec.dry_run {
        return dry_run(spec);
    }
    let grid = spec.grid()?;
    let d = spec.dim;
    let t_ref = spec.ladder.t.iter().cloned().fold(0.0, f64::max);
    let solves = cutoffs(spec, t_ref);
    let mut report = ExperimentReport::new(spec);
    let out = collect(spec, ctx, &mut report, |index| {
        let a = coefficients(spec, &grid, index)?;
        let mut phis: BTreeMap<u64, Vec<ScalarField>> = BTreeMap::new();
        let mut prev: Vec<Option<ScalarField>> = vec![None; d];
        for &t in &solves {
            let mut row = Vec::with_capacity(d);
            for (dir, guess) in prev.iter_mut().enumerate() {
                let c = modified_corrector_with_guess(&a, t, dir, &spec.solver, guess.as_ref())?;
                *guess = Some(c.phi.clone());
                row.push(c.phi);
            }
            phis.insert(t.to_bits(), row);
        }
        let refs: Vec<ScalarField> = (0..d)
            .map(|i| pick(&phis, t_ref, REFERENCE_KAPPA, i))
            .collect::<Result<_>>()?;
        let ref_grads: Vec<VectorField> = refs.iter().map(discrete_gradient).collect();
        let a_ref = quadratic_form(&a, &refs.iter().collect::<Vec<_>>());
        let mut grad = Vec::new();
        let mut a_diff = Vec::new();
        for &k in &spec.ladder.kappa {
            let mut g_row = Vec::new();
            let mut a_row = Vec::new();
            for &t in &spec.ladder.t {
                let ext: Vec<ScalarField> = (0..d).map(|i| pick(&phis, t, k, i)).collect::<Result<_>>()?;
                let g = ext
                    .iter()
                    .zip(&ref_grads)
                    .map(|(p, r)| mean_sq_diff(&discrete_gradient(p), r))
                    .sum::<f64>()
                    / d as f64;
                g_row.push(g);
                let m = quadratic_form(&a, &ext.iter().collect::<Vec<_>>()) - &a_ref;
                a_row.push(m.as_slice().to_vec());
            }
            grad.push(g_row);
            a_diff.push(a_row);
        }
        Ok(Sample {
            grad,
            a_diff,
            a_ref: a_ref.as_slice().to_vec(),
        })
    })?;
    if out.is_empty() {
        return Err(Error::Consistency("every sample failed".into()));
    }

    let n = out.len();
    let ts = &spec.ladder.t;
    let a_ref_mean = mean_matrix(out.values().map(|s| &s.a_ref), d);
    for (i, v) in a_ref_mean.iter().enumerate() {
        report.value(format!("a_ref_{}{}", i % d, i / d), *v);
    }
    report.value("t_ref", t_ref);
    for (slot, &k) in spec.ladder.kappa.iter().enumerate() {
        let mut grad_y = Vec::new();
        let mut a_y = Vec::new();
        for (ti, &t) in ts.iter().enumerate() {
            let g: Vec<f64> = out.values().map(|s| s.grad[slot][ti]).collect();
            let e = jackknife(n, |idx| mean_of(&g, idx).sqrt());
            report.rung(&format!("grad_error_kappa{k}"), t, e.value, e.stderr, n);
            grad_y.push(e.value);

            let cols: Vec<Vec<f64>> = (0..d * d)
                .map(|c| out.values().map(|s| s.a_diff[slot][ti][c]).collect())
                .collect();
            let e = jackknife(n, |idx| cols.iter().map(|c| mean_of(c, idx).powi(2)).sum::<f64>().sqrt());
            report.rung(&format!("a_error_kappa{k}"), t, e.value, e.stderr, n);
            a_y.push(e.value);
        }
        let grad_fit = rate_fit(ts, &grad_y)?;
        let a_fit = rate_fit(ts, &a_y)?;
        if k == 1 {
            report.fits.push(FitCheck::slope(
                "grad_slope_kappa1",
                grad_fit,
                -(d as f64) / 4.0,
                GRADIENT_TOLERANCE,
            ));
            report.fits.push(FitCheck::slope(
                "a_slope_kappa1",
                a_fit,
                -(d as f64) / 2.0,
                COEFFICIENT_TOLERANCE,
            ));
        } else {
            report.value(format!("grad_slope_kappa{k}"), grad_fit.slope);
            report.value(format!("a_slope_kappa{k}"), a_fit.slope);
        }
    }
    report.finish();
    Ok(report)
}

fn mean_matrix<'a>(rows: impl Iterator<Item = &'a Vec<f64>>, d: usize) -> Vec<f64> {
    let mut acc = vec![0.0; d * d];
    let mut n = 0.0;
    for r in rows {
        for (a, v) in acc.iter_mut().zip(r) {
            *a += v;
        }
        n += 1.0;
    }
    acc.iter().map(|v| v / n).collect()
}

/// Runs the extrapolation pipeline on `f(T) = c0 + c1 / T`.
fn dry_run(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let (c0, c1) = DRY_RUN_MODEL;
    let f = |t: f64| DMatrix::from_element(1, 1, c0 + c1 / t);
    let t_ref = spec.ladder.t.iter().cloned().fold(0.0, f64::max);
    let rungs_at = |t: f64, k: usize| -> Vec<DMatrix<f64>> { (0..k).map(|j| f(t * (1u64 << j) as f64)).collect() };
    let reference = richardson_extrapolate(&rungs_at(t_ref, REFERENCE_KAPPA), REFERENCE_KAPPA)?[(0, 0)];
    let mut report = ExperimentReport::new(spec);
    report.value("t_ref", t_ref);
    report.value("reference", reference);
    for &k in &spec.ladder.kappa {
        let mut ys = Vec::new();
        for &t in &spec.ladder.t {
            let v = richardson_extrapolate(&rungs_at(t, k), k)?[(0, 0)];
            let y = (v - reference).abs();
            report.rung(&format!("model_error_kappa{k}"), t, y, 0.0, 0);
            ys.push(y);
        }
        if k == 1 {
            report
                .fits
                .push(FitCheck::slope("model_slope_kappa1", rate_fit(&spec.ladder.t, &ys)?, -1.0, 1e-9));
        }
    }
    report.finish();
    Ok(report)
}
