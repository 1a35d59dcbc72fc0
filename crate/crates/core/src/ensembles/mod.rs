//! Stationary random conductance ensembles with finite range of dependence.

mod coefficient;
mod rng;

pub use coefficient::CoefficientField;
pub use rng::{CounterRng, Stream};

use serde::{Deserialize, Serialize};

use crate::lattice::TorusGrid;
use crate::{Error, Result};

pub const DEFAULT_LAMBDA: f64 = 0.25;
pub const DEFAULT_P: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleKind {
    /// Each edge is `lambda` with probability `p`, else 1.
    Bernoulli,
    /// Each edge uniform on `[lambda, 1]`.
    Uniform,
    /// One uniform draw on `[lambda, 1]` per `m`-cube, shared by all edges
    /// whose tail lies in the cube.
    Block,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub block_size: Option<usize>,
}

fn default_lambda() -> f64 {
    DEFAULT_LAMBDA
}

fn default_p() -> f64 {
    DEFAULT_P
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self::bernoulli(DEFAULT_LAMBDA, DEFAULT_P)
    }
}

impl EnsembleSpec {
    pub fn bernoulli(lambda: f64, p: f64) -> Self {
        Self {
            kind: EnsembleKind::Bernoulli,
            lambda,
            p,
            block_size: None,
        }
    }

    pub fn uniform(lambda: f64) -> Self {
        Self {
            kind: EnsembleKind::Uniform,
            lambda,
            p: DEFAULT_P,
            block_size: None,
        }
    }

    pub fn block(lambda: f64, m: usize) -> Self {
        Self {
            kind: EnsembleKind::Block,
            lambda,
            p: DEFAULT_P,
            block_size: Some(m),
        }
    }

    /// Range of dependence in lattice units.
    pub fn range(&self) -> usize {
        match self.kind {
            EnsembleKind::Block => self.block_size.unwrap_or(1),
            _ => 1,
        }
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        crate::hash_json(self)
    }

    pub fn validate(&self, grid: &TorusGrid) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(Error::param(format!(
                "lambda must lie in (0, 1), got {}",
                self.lambda
            )));
        }
        match self.kind {
            EnsembleKind::Bernoulli if !(0.0..=1.0).contains(&self.p) => Err(Error::param(
                format!("bernoulli probability must lie in [0, 1], got {}", self.p),
            )),
            EnsembleKind::Block => match self.block_size {
                Some(m) if m >= 1 && grid.side() % m == 0 => Ok(()),
                Some(m) => Err(Error::param(format!(
                    "block size {m} must divide the side length {}",
                    grid.side()
                ))),
                None => Err(Error::param("block ensemble needs block_size")),
            },
            _ => Ok(()),
        }
    }
}

/// Draws realization `index` of the ensemble. The value on each edge is a
/// function of `(master_seed, index, edge id)` only.
pub fn sample(
    spec: &EnsembleSpec,
    grid: &TorusGrid,
    master_seed: u64,
    index: u64,
) -> Result<CoefficientField> {
    spec.validate(grid)?;
    let lambda = spec.lambda;
    let n = grid.sites();
    let mut rng = CounterRng::new(master_seed, index, Stream::Coefficients);
    let planes: Vec<Vec<f64>> = match spec.kind {
        EnsembleKind::Bernoulli => {
            // Sequential reads equal the random-access values at counter = edge id.
            let mut all = Vec::with_capacity(grid.edges());
            for _ in 0..grid.edges() {
                all.push(if rng.next_f64() < spec.p { lambda } else { 1.0 });
            }
            all.chunks(n).map(|c| c.to_vec()).collect()
        }
        EnsembleKind::Uniform => {
            let mut all = Vec::with_capacity(grid.edges());
            for _ in 0..grid.edges() {
                all.push(lambda + (1.0 - lambda) * rng.next_f64());
            }
            all.chunks(n).map(|c| c.to_vec()).collect()
        }
        EnsembleKind::Block => {
            let m = spec.block_size.expect("validated");
            let per_side = grid.side() / m;
            let blocks = per_side.pow(grid.dim() as u32);
            let mut draws = Vec::with_capacity(blocks);
            for _ in 0..blocks {
                draws.push(lambda + (1.0 - lambda) * rng.next_f64());
            }
            let mut plane = vec![0.0; n];
            grid.for_each_site(|idx, c| {
                let b = c.iter().fold(0, |acc, &ci| acc * per_side + ci / m);
                plane[idx] = draws[b];
            });
            vec![plane; grid.dim()]
        }
    };
    CoefficientField::from_conductances(*grid, planes, lambda)
}

/// Outcome of [`empirical_range_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RangeCheck {
    pub separation: usize,
    /// Largest absolute correlation over edge orientations and shift axes.
    pub max_abs_correlation: f64,
    /// Monte Carlo standard error `1/sqrt(n_samples)` of a single correlation.
    pub stderr: f64,
}

/// Site-pooled empirical correlation between the conductances of edges
/// `(x, i)` and `(x + separation e_j, i)`; the maximum over `i, j` is
/// reported.
pub fn empirical_range_check(
    spec: &EnsembleSpec,
    grid: &TorusGrid,
    master_seed: u64,
    n_samples: usize,
    separation: usize,
) -> Result<RangeCheck> {
    if n_samples < 100 {
        return Err(Error::param("range check needs at least 100 samples"));
    }
    let d = grid.dim();
    let n = grid.sites();
    let mut sum = vec![0.0; d];
    let mut sum_sq = vec![0.0; d];
    let mut cross = vec![vec![0.0; d]; d];
    let partners: Vec<Vec<usize>> = (0..d)
        .map(|j| {
            let mut shift = [0i64; 3];
            shift[j] = separation as i64;
            (0..n).map(|x| grid.offset(x, &shift[..d])).collect()
        })
        .collect();
    for s in 0..n_samples {
        let a = sample(spec, grid, master_seed, s as u64)?;
        for i in 0..d {
            let plane = a.axis(i);
            for x in 0..n {
                sum[i] += plane[x];
                sum_sq[i] += plane[x] * plane[x];
            }
            for j in 0..d {
                cross[i][j] += (0..n).map(|x| plane[x] * plane[partners[j][x]]).sum::<f64>();
            }
        }
    }
    let count = (n_samples * n) as f64;
    let mut max_abs = 0.0f64;
    for i in 0..d {
        let mean = sum[i] / count;
        let var = sum_sq[i] / count - mean * mean;
        for j in 0..d {
            let cov = cross[i][j] / count - mean * mean;
            let corr = if var > 0.0 { cov / var } else { 0.0 };
            max_abs = max_abs.max(corr.abs());
        }
    }
    Ok(RangeCheck {
        separation,
        max_abs_correlation: max_abs,
        stderr: 1.0 / (n_samples as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(l: usize) -> TorusGrid {
        TorusGrid::new(2, l).unwrap()
    }

    #[test]
    fn degenerate_probabilities() {
        let g = grid(8);
        let all_one = sample(&EnsembleSpec::bernoulli(0.25, 0.0), &g, 1, 0).unwrap();
        assert!(all_one.planes().iter().flatten().all(|&v| v == 1.0));
        let all_lambda = sample(&EnsembleSpec::bernoulli(0.25, 1.0), &g, 1, 0).unwrap();
        assert!(all_lambda.planes().iter().flatten().all(|&v| v == 0.25));
    }

    #[test]
    fn deterministic_per_seed_and_index() {
        let g = grid(16);
        for spec in [
            EnsembleSpec::default(),
            EnsembleSpec::uniform(0.3),
            EnsembleSpec::block(0.3, 4),
        ] {
            let a = sample(&spec, &g, 99, 7).unwrap();
            let b = sample(&spec, &g, 99, 7).unwrap();
            assert_eq!(a, b);
            let c = sample(&spec, &g, 99, 8).unwrap();
            assert_ne!(a, c);
        }
    }

    #[test]
    fn values_match_random_access_counters() {
        let g = grid(8);
        let spec = EnsembleSpec::uniform(0.2);
        let a = sample(&spec, &g, 5, 3).unwrap();
        let mut rng = CounterRng::new(5, 3, Stream::Coefficients);
        for edge in [0usize, 17, 63, 64, 127] {
            let expect = 0.2 + 0.8 * rng.f64_at(edge as u64);
            assert_eq!(a.axis(edge / 64)[edge % 64], expect);
        }
    }

    #[test]
    fn ellipticity_bounds_hold() {
        let g = grid(16);
        for spec in [
            EnsembleSpec::default(),
            EnsembleSpec::uniform(0.1),
            EnsembleSpec::block(0.5, 8),
        ] {
            for idx in 0..20 {
                let a = sample(&spec, &g, 3, idx).unwrap();
                assert!(a
                    .planes()
                    .iter()
                    .flatten()
                    .all(|&v| v >= spec.lambda && v <= 1.0));
            }
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let g = grid(8);
        assert!(sample(&EnsembleSpec::bernoulli(0.0, 0.5), &g, 0, 0).is_err());
        assert!(sample(&EnsembleSpec::bernoulli(0.5, 1.5), &g, 0, 0).is_err());
        assert!(sample(&EnsembleSpec::block(0.5, 3), &g, 0, 0).is_err());
        let no_m = EnsembleSpec {
            block_size: None,
            ..EnsembleSpec::block(0.5, 2)
        };
        assert!(sample(&no_m, &g, 0, 0).is_err());
    }

    #[test]
    fn stationary_mean_per_direction() {
        let g = grid(8);
        let spec = EnsembleSpec::default();
        let n = 1000;
        let mut sums = vec![vec![0.0; g.sites()]; 2];
        for idx in 0..n {
            let a = sample(&spec, &g, 11, idx).unwrap();
            for i in 0..2 {
                for (s, v) in sums[i].iter_mut().zip(a.axis(i)) {
                    *s += v;
                }
            }
        }
        // Bernoulli(0.5) on {0.25, 1}: mean 0.625, std 0.375.
        let se = 0.375 / (n as f64).sqrt();
        let global: f64 = sums.iter().flatten().sum::<f64>() / (2 * g.sites() * n as usize) as f64;
        // 4 standard errors per site; the pooled mean also matches the law.
        let bad = sums
            .iter()
            .flatten()
            .filter(|s| (*s / n as f64 - global).abs() > 4.0 * se)
            .count();
        assert!(bad <= 1, "{bad} sites outside 4 standard errors");
        assert!((global - 0.625).abs() < 4.0 * se / (2.0 * 64f64).sqrt());
    }

    #[test]
    fn bernoulli_is_uncorrelated_at_separation_two() {
        let g = grid(8);
        let r = empirical_range_check(&EnsembleSpec::default(), &g, 21, 10_000, 2).unwrap();
        assert!(r.max_abs_correlation <= 4.0 * r.stderr, "{r:?}");
    }

    #[test]
    fn block_correlation_inside_and_beyond_range() {
        let g = grid(16);
        let spec = EnsembleSpec::block(0.25, 4);
        let inside = empirical_range_check(&spec, &g, 2, 2000, 2).unwrap();
        assert!(inside.max_abs_correlation > 0.3, "{inside:?}");
        let beyond = empirical_range_check(&spec, &g, 2, 10_000, 8).unwrap();
        assert!(beyond.max_abs_correlation <= 4.0 * beyond.stderr, "{beyond:?}");
        assert!(empirical_range_check(&spec, &g, 2, 50, 8).is_err());
    }
}
