use nalgebra::DMatrix;

use super::corrector::{modified_corrector_with_guess, quadratic_form};
use super::solver::SolverConfig;
use crate::ensembles::CoefficientField;
use crate::lattice::ScalarField;
use crate::{Error, Result};

/// Quantities that can be combined linearly by the extrapolation.
pub trait Extrapolate: Clone {
    /// `(w * hi - lo) / (w - 1)`.
    fn combine(hi: &Self, lo: &Self, w: f64) -> Self;
}

impl Extrapolate for f64 {
    fn combine(hi: &Self, lo: &Self, w: f64) -> Self {
        (w * hi - lo) / (w - 1.0)
    }
}

impl Extrapolate for ScalarField {
    fn combine(hi: &Self, lo: &Self, w: f64) -> Self {
        hi.scaled(w).axpy(-1.0, lo).scaled(1.0 / (w - 1.0))
    }
}

impl Extrapolate for DMatrix<f64> {
    fn combine(hi: &Self, lo: &Self, w: f64) -> Self {
        (hi * w - lo) / (w - 1.0)
    }
}

/// Given values at `T, 2T, ..., 2^{kappa-1} T`, returns the level-`kappa`
/// extrapolation at `T`.
pub fn richardson_extrapolate<V: Extrapolate>(values: &[V], kappa: usize) -> Result<V> {
    if kappa == 0 {
        return Err(Error::param("kappa must be >= 1"));
    }
    if values.len() != kappa {
        return Err(Error::param(format!(
            "kappa = {kappa} needs {kappa} values, got {}",
            values.len()
        )));
    }
    let mut level: Vec<V> = values.to_vec();
    for k in 1..kappa {
        let w = (1u64 << k) as f64;
        level = level
            .windows(2)
            .map(|p| V::combine(&p[1], &p[0], w))
            .collect();
    }
    Ok(level.swap_remove(0))
}

/// Extrapolated resolvent `g_kappa(mu, T)` with `g_1 = 1 / (1/T + mu)`.
pub fn resolvent_g_kappa(mu: f64, t: f64, kappa: usize) -> Result<f64> {
    if !(mu >= 0.0) || !(t > 0.0) {
        return Err(Error::param(format!("need mu >= 0 and T > 0, got mu={mu}, T={t}")));
    }
    let values: Vec<f64> = (0..kappa)
        .map(|j| 1.0 / (1.0 / (t * (1u64 << j) as f64) + mu))
        .collect();
    richardson_extrapolate(&values, kappa)
}

/// Extrapolated correctors `phi_T^kappa`, one per direction, together with
/// the correctors at each rung `T, 2T, ...`.
#[derive(Debug, Clone)]
pub struct RichardsonCorrectors {
    pub t: f64,
    pub kappa: usize,
    pub extrapolated: Vec<ScalarField>,
    pub rungs: Vec<Vec<ScalarField>>,
}

pub fn richardson_correctors(
    a: &CoefficientField,
    t: f64,
    kappa: usize,
    cfg: &SolverConfig,
) -> Result<RichardsonCorrectors> {
    if kappa == 0 {
        return Err(Error::param("kappa must be >= 1"));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::param(format!("cutoff must be finite and > 0, got {t}")));
    }
    let d = a.grid().dim();
    let mut rungs: Vec<Vec<ScalarField>> = vec![Vec::with_capacity(kappa); d];
    for (i, rung) in rungs.iter_mut().enumerate() {
        for j in 0..kappa {
            let tj = t * (1u64 << j) as f64;
            let c = modified_corrector_with_guess(a, tj, i, cfg, rung.last())?;
            rung.push(c.phi);
        }
    }
    let extrapolated = rungs
        .iter()
        .map(|r| richardson_extrapolate(r, kappa))
        .collect::<Result<Vec<_>>>()?;
    Ok(RichardsonCorrectors {
        t,
        kappa,
        extrapolated,
        rungs,
    })
}

/// `e_j . a_hT^kappa e_i` through the quadratic form of the extrapolated
/// correctors.
pub fn a_ht_kappa(
    a: &CoefficientField,
    t: f64,
    kappa: usize,
    cfg: &SolverConfig,
) -> Result<DMatrix<f64>> {
    let rc = richardson_correctors(a, t, kappa, cfg)?;
    let refs: Vec<&ScalarField> = rc.extrapolated.iter().collect();
    Ok(quadratic_form(a, &refs))
}
