use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Dyadic time grid: `[0, 1]` and then `[2^(k-1), 2^k]` for `k >= 1`, each
/// split into `steps_per_dyad` uniform steps.
///
/// Nodes are addressed by a global integer index so that times never
/// accumulate rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TimeGrid {
    pub steps_per_dyad: usize,
}

pub const MIN_STEPS_PER_DYAD: usize = 4;

impl TimeGrid {
    pub fn new(steps_per_dyad: usize) -> Result<Self> {
        if steps_per_dyad < MIN_STEPS_PER_DYAD {
            return Err(Error::param(format!(
                "steps_per_dyad must be >= {MIN_STEPS_PER_DYAD}, got {steps_per_dyad}"
            )));
        }
        Ok(Self { steps_per_dyad })
    }

    /// Time of node `n`.
    pub fn time(&self, n: usize) -> f64 {
        let s = self.steps_per_dyad;
        let (span, j) = (n / s, n % s);
        if span == 0 {
            j as f64 / s as f64
        } else {
            let start = (1u64 << (span - 1)) as f64;
            start * (1.0 + j as f64 / s as f64)
        }
    }

    /// Length of the step from node `n` to node `n + 1`.
    pub fn step(&self, n: usize) -> f64 {
        let span = n / self.steps_per_dyad;
        let len = if span == 0 {
            1.0
        } else {
            (1u64 << (span - 1)) as f64
        };
        len / self.steps_per_dyad as f64
    }

    /// Node index of time `t`, which must be a node of the grid.
    pub fn node(&self, t: f64) -> Result<usize> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::param(format!("time must be finite and >= 0, got {t}")));
        }
        let s = self.steps_per_dyad;
        let span = if t < 1.0 {
            0
        } else {
            t.log2().floor() as usize + 1
        };
        let (start, len) = if span == 0 {
            (0.0, 1.0)
        } else {
            let st = (1u64 << (span - 1)) as f64;
            (st, st)
        };
        let j = ((t - start) / len * s as f64).round() as usize;
        let n = span * s + j;
        let close = (self.time(n) - t).abs() <= 1e-12 * t.max(1.0);
        if !close {
            return Err(Error::param(format!(
                "time {t} is not a node of the grid with {s} steps per dyad"
            )));
        }
        Ok(n)
    }

    /// Node indices of `0, 1, 2, 4, ..., t_max`.
    pub fn dyadic_nodes(&self, t_max: f64) -> Result<Vec<usize>> {
        check_dyadic(t_max)?;
        let top = t_max.log2().round() as usize + 1;
        Ok((0..=top).map(|k| k * self.steps_per_dyad).collect())
    }
}

/// `t` must be a power of two, at least 1.
pub fn check_dyadic(t: f64) -> Result<()> {
    if !(t >= 1.0 && t.is_finite()) || t.log2().fract() != 0.0 {
        return Err(Error::param(format!("time must be a power of two >= 1, got {t}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_and_steps_tile_the_axis() {
        let g = TimeGrid::new(4).unwrap();
        let times: Vec<f64> = (0..=12).map(|n| g.time(n)).collect();
        assert_eq!(
            times,
            vec![0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.5, 3.0, 3.5, 4.0]
        );
        for n in 0..40 {
            assert!((g.time(n) + g.step(n) - g.time(n + 1)).abs() < 1e-12);
            assert_eq!(g.node(g.time(n)).unwrap(), n);
        }
        assert_eq!(g.dyadic_nodes(4.0).unwrap(), vec![0, 4, 8, 12]);
    }

    #[test]
    fn off_grid_times_are_rejected() {
        let g = TimeGrid::new(8).unwrap();
        assert!(g.node(0.3).is_err());
        assert!(g.node(-1.0).is_err());
        assert!(TimeGrid::new(3).is_err());
        assert!(check_dyadic(3.0).is_err());
        assert!(check_dyadic(0.5).is_err());
        assert!(check_dyadic(64.0).is_ok());
    }
}
