use serde::{Deserialize, Serialize};

use super::jackknife::{correlation, Estimate};
use crate::lattice::{TorusGrid, VectorField};
use crate::{Error, Result};

/// Compactly supported bump `prod_i (1 + cos(pi r_i / (h + 1))) / 2` on the
/// box `|r_i| <= h` around `center`, paired with fixed component weights and
/// normalized to unit `l^2` norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub center: Vec<usize>,
    pub half_width: usize,
    pub weights: Vec<f64>,
}

impl TestFunction {
    pub fn new(center: Vec<usize>, half_width: usize, weights: Vec<f64>) -> Self {
        Self {
            center,
            half_width,
            weights,
        }
    }

    fn check(&self, grid: &TorusGrid) -> Result<()> {
        let d = grid.dim();
        if self.center.len() != d || self.weights.len() != d {
            return Err(Error::param(format!("test function needs {d} coordinates and weights")));
        }
        if 2 * self.half_width + 1 > grid.side() {
            return Err(Error::param("test function support wraps around the torus"));
        }
        Ok(())
    }

    /// `(site, value)` pairs over the support.
    pub fn support(&self, grid: &TorusGrid) -> Result<Vec<(usize, f64)>> {
        self.check(grid)?;
        let d = grid.dim();
        let h = self.half_width as i64;
        let width = (2 * h + 1) as usize;
        let origin = grid.index(&self.center);
        let profile: Vec<f64> = (-h..=h)
            .map(|r| 0.5 * (1.0 + (std::f64::consts::PI * r as f64 / (h + 1) as f64).cos()))
            .collect();
        let mut out = Vec::with_capacity(width.pow(d as u32));
        let mut shift = [0i64; 3];
        for n in 0..width.pow(d as u32) {
            let mut m = n;
            let mut w = 1.0;
            for s in shift.iter_mut().take(d) {
                let k = m % width;
                m /= width;
                *s = k as i64 - h;
                w *= profile[k];
            }
            out.push((grid.offset(origin, &shift[..d]), w));
        }
        let norm = out.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        for p in &mut out {
            p.1 /= norm;
        }
        Ok(out)
    }

    /// `sum_x zeta(x) w . F(x)`.
    pub fn integrate(&self, field: &VectorField) -> Result<f64> {
        let support = self.support(field.grid())?;
        Ok(support
            .iter()
            .map(|&(x, z)| {
                z * self
                    .weights
                    .iter()
                    .enumerate()
                    .map(|(j, w)| w * field.component(j)[x])
                    .sum::<f64>()
            })
            .sum())
    }

    /// Periodic sup-norm gap between two supports; positive means disjoint.
    pub fn gap(&self, other: &TestFunction, grid: &TorusGrid) -> i64 {
        let l = grid.side() as i64;
        (0..grid.dim())
            .map(|i| {
                let d = (self.center[i] as i64 - other.center[i] as i64).rem_euclid(l);
                d.min(l - d) - (self.half_width + other.half_width) as i64
            })
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndependenceCheck {
    pub separation: i64,
    pub correlation: Estimate,
    pub n: usize,
}

pub const MIN_INDEPENDENCE_SAMPLES: usize = 200;

/// Correlation across samples of the two test integrals; supports must be
/// at least `separation >= 1` apart.
pub fn independence_check(
    fields: &[VectorField],
    zeta: &TestFunction,
    zeta_prime: &TestFunction,
    separation: i64,
) -> Result<IndependenceCheck> {
    let grid = *fields.first().ok_or_else(|| Error::param("no samples"))?.grid();
    let gap = zeta.gap(zeta_prime, &grid);
    if separation < 1 || gap < separation {
        return Err(Error::param(format!(
            "supports are {gap} apart, need at least {}",
            separation.max(1)
        )));
    }
    let mut check = correlation_check(fields, zeta, zeta_prime)?;
    check.separation = gap;
    Ok(check)
}

/// As [`independence_check`] without the support condition.
pub fn correlation_check(
    fields: &[VectorField],
    zeta: &TestFunction,
    zeta_prime: &TestFunction,
) -> Result<IndependenceCheck> {
    if fields.len() < MIN_INDEPENDENCE_SAMPLES {
        return Err(Error::param(format!(
            "independence check needs at least {MIN_INDEPENDENCE_SAMPLES} samples, got {}",
            fields.len()
        )));
    }
    let grid = *fields[0].grid();
    let x = fields
        .iter()
        .map(|f| zeta.integrate(f))
        .collect::<Result<Vec<_>>>()?;
    let y = fields
        .iter()
        .map(|f| zeta_prime.integrate(f))
        .collect::<Result<Vec<_>>>()?;
    Ok(IndependenceCheck {
        separation: zeta.gap(zeta_prime, &grid),
        correlation: correlation(&x, &y),
        n: fields.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{CounterRng, Stream};

    fn noise_fields(g: TorusGrid, n: usize) -> Vec<VectorField> {
        (0..n as u64)
            .map(|k| {
                let mut rng = CounterRng::new(3, k, Stream::Synthetic);
                let comps = (0..2)
                    .map(|_| (0..g.sites()).map(|_| rng.next_gaussian()).collect())
                    .collect();
                VectorField::from_components(g, comps).unwrap()
            })
            .collect()
    }

    #[test]
    fn bump_is_normalized_and_supported() {
        let g = TorusGrid::new(2, 16).unwrap();
        let z = TestFunction::new(vec![0, 0], 2, vec![1.0, 0.0]);
        let s = z.support(&g).unwrap();
        assert_eq!(s.len(), 25);
        assert!((s.iter().map(|p| p.1 * p.1).sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(s.iter().all(|p| p.1 > 0.0));
        let far = TestFunction::new(vec![8, 0], 2, vec![1.0, 0.0]);
        assert_eq!(z.gap(&far, &g), 4);
        let near = TestFunction::new(vec![3, 15], 2, vec![1.0, 0.0]);
        assert_eq!(z.gap(&near, &g), -1);
    }

    #[test]
    fn white_noise_integrals_are_uncorrelated() {
        let g = TorusGrid::new(2, 16).unwrap();
        let f = noise_fields(g, 300);
        let z = TestFunction::new(vec![0, 0], 2, vec![1.0, 0.5]);
        let zp = TestFunction::new(vec![8, 8], 2, vec![0.3, 1.0]);
        let c = independence_check(&f, &z, &zp, 1).unwrap();
        assert!(c.correlation.within(4.0), "{c:?}");
        let same = correlation_check(&f, &z, &z).unwrap();
        assert!((same.correlation.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overlapping_supports_are_rejected() {
        let g = TorusGrid::new(2, 16).unwrap();
        let f = noise_fields(g, 200);
        let z = TestFunction::new(vec![0, 0], 3, vec![1.0, 0.0]);
        let zp = TestFunction::new(vec![4, 0], 3, vec![1.0, 0.0]);
        assert!(independence_check(&f, &z, &zp, 1).is_err());
        assert!(independence_check(&f, &z, &z, 1).is_err());
    }
}
