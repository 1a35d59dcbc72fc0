use serde::{Deserialize, Serialize};

use super::fit::{rate_fit, RateFit};
use super::jackknife::{jackknife, variance_of};
use crate::lattice::{mollified_at_origin, ScalarField};
use crate::{Error, Result};

pub const MIN_CLT_SAMPLES: usize = 30;

/// Cross-sample standard deviation of `F_R(0)` (the Gaussian average of a
/// field at scale `R`) for each scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltProfile {
    pub scales: Vec<f64>,
    pub std: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n: usize,
}

impl CltProfile {
    /// Builds the profile from per-sample origin values, `values[n][r]`.
    pub fn from_origin_values(scales: &[f64], values: &[Vec<f64>]) -> Result<Self> {
        if values.len() < MIN_CLT_SAMPLES {
            return Err(Error::param(format!(
                "CLT profile needs at least {MIN_CLT_SAMPLES} samples, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| v.len() != scales.len()) {
            return Err(Error::param("every sample needs one value per scale"));
        }
        let mut std = Vec::with_capacity(scales.len());
        let mut stderr = Vec::with_capacity(scales.len());
        for r in 0..scales.len() {
            let col: Vec<f64> = values.iter().map(|v| v[r]).collect();
            let e = jackknife(col.len(), |idx| variance_of(&col, idx).sqrt());
            std.push(e.value);
            stderr.push(e.stderr);
        }
        Ok(Self {
            scales: scales.to_vec(),
            std,
            stderr,
            n: values.len(),
        })
    }

    /// All standard deviations vanish (up to rounding).
    pub fn is_degenerate(&self) -> bool {
        self.std.iter().all(|&s| s <= 1e-14)
    }

    /// Slope of `log std` against `log R`.
    pub fn fit(&self) -> Result<RateFit> {
        if self.is_degenerate() {
            return Err(Error::param("degenerate profile: all standard deviations vanish"));
        }
        rate_fit(&self.scales, &self.std)
    }
}

pub fn clt_profile(samples: &[ScalarField], scales: &[f64]) -> Result<CltProfile> {
    let grid = *samples
        .first()
        .ok_or_else(|| Error::param("no samples"))?
        .grid();
    let values = samples
        .iter()
        .map(|s| {
            grid.check_same(s.grid())?;
            mollified_at_origin(&grid, s.values(), scales)
        })
        .collect::<Result<Vec<_>>>()?;
    CltProfile::from_origin_values(scales, &values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{CounterRng, Stream};
    use crate::lattice::TorusGrid;
    use std::f64::consts::PI;

    #[test]
    fn white_noise_decays_like_inverse_radius() {
        let g = TorusGrid::new(2, 64).unwrap();
        let scales = [1.0, 2.0, 4.0, 8.0];
        let samples: Vec<ScalarField> = (0..500)
            .map(|n| {
                let mut rng = CounterRng::new(5, n, Stream::Synthetic);
                ScalarField::from_fn(g, |_| rng.next_gaussian())
            })
            .collect();
        let p = clt_profile(&samples, &scales).unwrap();
        let f = p.fit().unwrap();
        assert!((f.slope + 1.0).abs() <= 0.1, "{f:?}");
        // std(F_R) ~ (4 pi R^2)^{-1/2} for R well above the lattice spacing
        for (r, (s, e)) in scales.iter().zip(p.std.iter().zip(&p.stderr)).skip(1) {
            let want = (4.0 * PI * r * r).powf(-0.5);
            assert!((s - want).abs() <= 4.0 * e + 0.02 * want, "R={r}: {s} vs {want}");
        }
    }

    #[test]
    fn constant_fields_are_degenerate() {
        let g = TorusGrid::new(2, 32).unwrap();
        let samples = vec![ScalarField::constant(g, 1.5); 30];
        let p = clt_profile(&samples, &[1.0, 2.0, 4.0]).unwrap();
        assert!(p.is_degenerate());
        assert!(p.fit().is_err());
    }

    #[test]
    fn rejects_small_samples_and_bad_scales() {
        let g = TorusGrid::new(2, 32).unwrap();
        let samples = vec![ScalarField::zeros(g); 29];
        assert!(clt_profile(&samples, &[1.0]).is_err());
        let samples = vec![ScalarField::zeros(g); 30];
        assert!(clt_profile(&samples, &[8.0]).is_err());
    }
}
