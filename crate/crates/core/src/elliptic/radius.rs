use serde::{Deserialize, Serialize};

use crate::lattice::{ScalarField, SkewField, TorusGrid};
use crate::Result;

pub const DEFAULT_DELTA: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimalRadius {
    pub radius: usize,
    /// Set when no dyadic radius up to `L/4` passes; `radius` is then `L/4`.
    pub capped: bool,
}

/// Dyadic radii `1, 2, 4, ..., L/4`.
pub fn dyadic_radii(grid: &TorusGrid) -> Vec<usize> {
    let max = grid.side() / 4;
    std::iter::successors(Some(1usize), |r| Some(r * 2))
        .take_while(|&r| r <= max)
        .collect()
}

/// `(1/R^2)` times the mean square oscillation of `(phi, sigma)` over the
/// sup-norm ball of radius `R` around `center`, with `|sigma|^2` the full
/// Frobenius norm.
pub fn ball_oscillation(
    phi: &ScalarField,
    sigma: &SkewField,
    center: usize,
    radius: usize,
) -> Result<f64> {
    let grid = *phi.grid();
    grid.check_same(sigma.grid())?;
    let mut channels: Vec<(&[f64], f64)> = vec![(phi.values(), 1.0)];
    channels.extend(sigma.components().iter().map(|c| (c.as_slice(), 2.0)));
    let r = radius as i64;
    let d = grid.dim();
    let width = (2 * r + 1) as usize;
    let count = width.pow(d as u32);
    let mut sum = vec![0.0; channels.len()];
    let mut sum2 = vec![0.0; channels.len()];
    let mut shift = [0i64; 3];
    for n in 0..count {
        let mut m = n;
        for s in shift.iter_mut().take(d) {
            *s = (m % width) as i64 - r;
            m /= width;
        }
        let x = grid.offset(center, &shift[..d]);
        for (c, (v, _)) in channels.iter().enumerate() {
            sum[c] += v[x];
            sum2[c] += v[x] * v[x];
        }
    }
    let nf = count as f64;
    let var: f64 = channels
        .iter()
        .enumerate()
        .map(|(c, (_, w))| w * (sum2[c] / nf - (sum[c] / nf).powi(2)).max(0.0))
        .sum();
    Ok(var / (radius * radius) as f64)
}

/// Smallest dyadic `r` such that the normalized oscillation is at most
/// `delta` on every dyadic ball of radius in `[r, L/4]` around the origin.
pub fn minimal_radius(phi: &ScalarField, sigma: &SkewField, delta: f64) -> Result<MinimalRadius> {
    minimal_radius_at(phi, sigma, delta, 0)
}

pub fn minimal_radius_at(
    phi: &ScalarField,
    sigma: &SkewField,
    delta: f64,
    center: usize,
) -> Result<MinimalRadius> {
    if !(delta > 0.0) {
        return Err(crate::Error::param(format!("delta must be > 0, got {delta}")));
    }
    let radii = dyadic_radii(phi.grid());
    let mut best = None;
    for &r in radii.iter().rev() {
        if ball_oscillation(phi, sigma, center, r)? > delta {
            break;
        }
        best = Some(r);
    }
    let cap = *radii.last().expect("side >= 4");
    Ok(match best {
        Some(radius) => MinimalRadius {
            radius,
            capped: false,
        },
        None => MinimalRadius {
            radius: cap,
            capped: true,
        },
    })
}
