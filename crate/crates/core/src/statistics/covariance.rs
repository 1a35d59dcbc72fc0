use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::jackknife::{covariance_of, jackknife};
use crate::parabolic::CommutatorField;
use crate::{Error, Result};

pub const MIN_COVARIANCE_SAMPLES: usize = 100;

/// `Q_hat = L^d Cov(torus mean of Xi e)` for one direction `e`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceEstimate {
    pub q_hat: DMatrix<f64>,
    pub stderr: DMatrix<f64>,
    pub t: f64,
    pub n: usize,
}

impl CovarianceEstimate {
    /// From per-sample torus means; `volume = L^d`.
    pub fn from_means(means: &[Vec<f64>], volume: f64, t: f64) -> Result<Self> {
        let n = means.len();
        if n < MIN_COVARIANCE_SAMPLES {
            return Err(Error::param(format!(
                "covariance needs at least {MIN_COVARIANCE_SAMPLES} samples, got {n}"
            )));
        }
        let d = means[0].len();
        if means.iter().any(|m| m.len() != d) {
            return Err(Error::param("inconsistent vector lengths"));
        }
        let cols: Vec<Vec<f64>> = (0..d).map(|j| means.iter().map(|m| m[j]).collect()).collect();
        let mut q_hat = DMatrix::zeros(d, d);
        let mut stderr = DMatrix::zeros(d, d);
        for j in 0..d {
            for k in j..d {
                let e = jackknife(n, |idx| volume * covariance_of(&cols[j], &cols[k], idx));
                for (a, b) in [(j, k), (k, j)] {
                    q_hat[(a, b)] = e.value;
                    stderr[(a, b)] = e.stderr;
                }
            }
        }
        Ok(Self { q_hat, stderr, t, n })
    }

    /// Largest entrywise `|Q_a - Q_b| / combined stderr`.
    pub fn max_z_against(&self, other: &CovarianceEstimate) -> f64 {
        let mut z: f64 = 0.0;
        for (i, (a, b)) in self.q_hat.iter().zip(other.q_hat.iter()).enumerate() {
            let s = self.stderr.as_slice()[i].hypot(other.stderr.as_slice()[i]);
            let v = if s == 0.0 {
                if a == b {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                (a - b).abs() / s
            };
            z = z.max(v);
        }
        z
    }

    /// Smallest eigenvalue of the (symmetric) estimate.
    pub fn min_eigenvalue(&self) -> f64 {
        self.q_hat
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn covariance_q(samples: &[CommutatorField]) -> Result<CovarianceEstimate> {
    let first = samples.first().ok_or_else(|| Error::param("no samples"))?;
    let grid = *first.xi.grid();
    let means: Vec<Vec<f64>> = samples.iter().map(|c| c.xi.mean()).collect();
    CovarianceEstimate::from_means(&means, grid.sites() as f64, first.t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{CounterRng, Stream};
    use crate::lattice::{TorusGrid, VectorField};

    fn field(xi: VectorField) -> CommutatorField {
        CommutatorField {
            t: 1.0,
            direction: 0,
            xi,
            abar: DMatrix::identity(2, 2),
        }
    }

    #[test]
    fn degenerate_ensemble_gives_zero() {
        let g = TorusGrid::new(2, 8).unwrap();
        let s: Vec<_> = (0..100).map(|_| field(VectorField::zeros(g))).collect();
        let q = covariance_q(&s).unwrap();
        assert_eq!(q.q_hat, DMatrix::zeros(2, 2));
    }

    #[test]
    fn white_noise_covariance_is_recovered() {
        // per-site covariance C = [[1, 0.5], [0.5, 2]] via a Cholesky factor
        let g = TorusGrid::new(2, 16).unwrap();
        let (l00, l10) = (1.0, 0.5);
        let l11 = (2.0f64 - 0.25).sqrt();
        let s: Vec<_> = (0..400)
            .map(|n| {
                let mut rng = CounterRng::new(1, n, Stream::Synthetic);
                let mut c0 = Vec::with_capacity(g.sites());
                let mut c1 = Vec::with_capacity(g.sites());
                for _ in 0..g.sites() {
                    let (z0, z1) = (rng.next_gaussian(), rng.next_gaussian());
                    c0.push(l00 * z0);
                    c1.push(l10 * z0 + l11 * z1);
                }
                field(VectorField::from_components(g, vec![c0, c1]).unwrap())
            })
            .collect();
        let q = covariance_q(&s).unwrap();
        let c = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 2.0]);
        for i in 0..4 {
            let (e, s) = (q.q_hat.as_slice()[i], q.stderr.as_slice()[i]);
            assert!((e - c.as_slice()[i]).abs() <= 4.0 * s, "{e} vs {}", c.as_slice()[i]);
        }
        assert!(q.min_eigenvalue() > 0.0);
        assert_eq!(q.q_hat, q.q_hat.transpose());
    }

    #[test]
    fn too_few_samples() {
        let g = TorusGrid::new(2, 8).unwrap();
        let s: Vec<_> = (0..99).map(|_| field(VectorField::zeros(g))).collect();
        assert!(covariance_q(&s).is_err());
    }
}
