//! Two-scale expansion error for `-div a grad u_eps = f` on the unit torus,
//! with `eps = 1/L`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::common::{coefficients, collect, root_mean};
use super::report::{ExperimentReport, FitCheck};
use super::runner::RunContext;
use super::spec::ExperimentSpec;
use crate::elliptic::{homogenized_coefficient_a_ht, modified_corrector, solve_massive_elliptic};
use crate::lattice::{discrete_gradient, ScalarField, Spectral, TorusGrid, VectorField};
use crate::statistics::rate_fit;
use crate::{Error, Result};

pub const EXPONENT_TOLERANCE: f64 = 0.2;
/// Width of the Gaussian bump in macroscopic units.
pub const BUMP_WIDTH: f64 = 0.1;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Sample {
    /// Squared `L^2` error per side.
    error_sq: Vec<f64>,
}

/// Fourier coefficient of `f(x) = sum_n exp(-|x - c + n|^2 / 2 s^2)` minus its
/// mean, with `c = (1/2, ..., 1/2)`.
pub fn bump_coefficient(k: &[i64]) -> f64 {
    if k.iter().all(|&x| x == 0) {
        return 0.0;
    }
    let s = BUMP_WIDTH;
    let k2: f64 = k.iter().map(|&x| (x * x) as f64).sum();
    let parity = if k.iter().sum::<i64>() % 2 == 0 { 1.0 } else { -1.0 };
    (2.0 * PI * s * s).powf(k.len() as f64 / 2.0) * (-2.0 * PI * PI * s * s * k2).exp() * parity
}

fn wavenumbers(grid: &TorusGrid, idx: &[usize]) -> Vec<i64> {
    idx.iter().map(|&c| grid.centered(c)).collect()
}

fn synthesize(grid: &TorusGrid, coeff: impl Fn(&[i64]) -> Complex64) -> Vec<f64> {
    let sp = Spectral::for_grid(grid);
    let mut z = vec![Complex64::new(0.0, 0.0); grid.sites()];
    let half = (grid.side() / 2) as i64;
    grid.for_each_site(|i, c| {
        let k = wavenumbers(grid, c);
        if k.iter().all(|&x| x.abs() < half) {
            z[i] = coeff(&k);
        }
    });
    sp.inverse(&mut z);
    let n = grid.sites() as f64;
    z.iter().map(|c| c.re * n).collect()
}

/// `f(h z)` on the lattice.
pub fn bump_on_grid(grid: &TorusGrid) -> ScalarField {
    ScalarField::from_raw(*grid, synthesize(grid, |k| Complex64::new(bump_coefficient(k), 0.0)))
}

/// `grad[m][j]`: `d_j u_hom` at the midpoints of the axis-`m` edges, where
/// `-div a grad u_hom = f` on the unit torus.
pub fn homogenized_gradients(grid: &TorusGrid, a: &DMatrix<f64>) -> Vec<Vec<Vec<f64>>> {
    let d = grid.dim();
    let l = grid.side() as f64;
    let u_hat = |k: &[i64]| {
        let kf: Vec<f64> = k.iter().map(|&x| x as f64).collect();
        let mut q = 0.0;
        for i in 0..d {
            for j in 0..d {
                q += kf[i] * a[(i, j)] * kf[j];
            }
        }
        if q == 0.0 {
            0.0
        } else {
            bump_coefficient(k) / (4.0 * PI * PI * q)
        }
    };
    (0..d)
        .map(|m| {
            (0..d)
                .map(|j| {
                    synthesize(grid, |k| {
                        let phase = Complex64::from_polar(1.0, PI * k[m] as f64 / l);
                        Complex64::new(0.0, 2.0 * PI * k[j] as f64) * u_hat(k) * phase
                    })
                })
                .collect()
        })
        .collect()
}

fn two_scale_error_sq(spec: &ExperimentSpec, side: usize, index: u64) -> Result<f64> {
    let grid = TorusGrid::new(spec.dim, side)?;
    let d = grid.dim();
    let h = 1.0 / side as f64;
    let a = coefficients(spec, &grid, index)?;
    let mut grads: Vec<VectorField> = Vec::with_capacity(d);
    let mut fluxes = Vec::with_capacity(d);
    for i in 0..d {
        let c = modified_corrector(&a, f64::INFINITY, i, &spec.solver)?;
        grads.push(discrete_gradient(&c.phi));
        fluxes.push(c.flux);
    }
    let a_per = homogenized_coefficient_a_ht(&fluxes.iter().collect::<Vec<_>>())?;
    let a_per = (&a_per + a_per.transpose()) * 0.5;
    let rhs = bump_on_grid(&grid).scaled(h * h);
    let u = solve_massive_elliptic(&a, f64::INFINITY, &rhs, &spec.solver)?;
    let du = discrete_gradient(&u);
    let hom = homogenized_gradients(&grid, &a_per);
    let mut total = 0.0;
    for m in 0..d {
        let dum = du.component(m);
        for x in 0..grid.sites() {
            let mut r = dum[x] / h - hom[m][m][x];
            for j in 0..d {
                r -= hom[m][j][x] * grads[j].component(m)[x];
            }
            total += r * r;
        }
    }
    Ok(total * h.powi(d as i32))
}

pub fn run(spec: &ExperimentSpec, ctx: &RunContext) -> Result<ExperimentReport> {
    let sides = spec.ladder.sides.clone();
    let mut report = ExperimentReport::new(spec);
    let out = collect(spec, ctx, &mut report, |index| {
        let error_sq = sides
            .iter()
            .map(|&l| two_scale_error_sq(spec, l, index))
            .collect::<Result<Vec<_>>>()?;
        Ok(Sample { error_sq })
    })?;
    if out.is_empty() {
        return Err(Error::Consistency("every sample failed".into()));
    }
    let n = out.len();
    let mut xs = Vec::new();
    let mut eps = Vec::new();
    let mut ys = Vec::new();
    for (k, &l) in sides.iter().enumerate() {
        let e: Vec<f64> = out.values().map(|s| s.error_sq[k]).collect();
        let est = root_mean(&e);
        let epsilon = 1.0 / l as f64;
        report.rung("two_scale_error", epsilon, est.value, est.stderr, n);
        eps.push(epsilon);
        xs.push(epsilon * (1.0 / epsilon).ln().sqrt());
        ys.push(est.value);
    }
    report.value("slope_against_eps", rate_fit(&eps, &ys)?.slope);
    report
        .fits
        .push(FitCheck::slope("two_scale_exponent", rate_fit(&xs, &ys)?, 1.0, EXPONENT_TOLERANCE));
    report.finish();
    Ok(report)
}
