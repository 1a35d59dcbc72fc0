use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::jackknife::{jackknife, Estimate};
use crate::{Error, Result};

pub const MIN_NORMALITY_SAMPLES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalityReport {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub skewness: Estimate,
    pub excess_kurtosis: Estimate,
    /// Kolmogorov-Smirnov distance to the normal law with the sample mean
    /// and variance.
    pub ks_distance: Estimate,
}

fn central_moments(x: &[f64], idx: &[usize]) -> (f64, f64, f64, f64) {
    let n = idx.len() as f64;
    let m = idx.iter().map(|&i| x[i]).sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &i in idx {
        let d = x[i] - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    (m, m2 / n, m3 / n, m4 / n)
}

fn skewness(x: &[f64], idx: &[usize]) -> f64 {
    let (_, m2, m3, _) = central_moments(x, idx);
    if m2 == 0.0 {
        0.0
    } else {
        m3 / m2.powf(1.5)
    }
}

fn excess_kurtosis(x: &[f64], idx: &[usize]) -> f64 {
    let (_, m2, _, m4) = central_moments(x, idx);
    if m2 == 0.0 {
        0.0
    } else {
        m4 / (m2 * m2) - 3.0
    }
}

fn ks_distance(x: &[f64], idx: &[usize]) -> f64 {
    let (m, m2, _, _) = central_moments(x, idx);
    if m2 == 0.0 {
        return 0.0;
    }
    let n = idx.len() as f64;
    let normal = Normal::new(m, (m2 * n / (n - 1.0)).sqrt()).expect("positive variance");
    let mut v: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v.iter()
        .enumerate()
        .map(|(k, &xi)| {
            let f = normal.cdf(xi);
            (f - k as f64 / n).abs().max(((k + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

pub fn normality_report(samples: &[f64]) -> Result<NormalityReport> {
    let n = samples.len();
    if n < MIN_NORMALITY_SAMPLES {
        return Err(Error::param(format!(
            "normality report needs at least {MIN_NORMALITY_SAMPLES} samples, got {n}"
        )));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("samples must be finite"));
    }
    let all: Vec<usize> = (0..n).collect();
    let (mean, m2, _, _) = central_moments(samples, &all);
    Ok(NormalityReport {
        n,
        mean,
        std: (m2 * n as f64 / (n as f64 - 1.0)).sqrt(),
        skewness: jackknife(n, |idx| skewness(samples, idx)),
        excess_kurtosis: jackknife(n, |idx| excess_kurtosis(samples, idx)),
        ks_distance: jackknife(n, |idx| ks_distance(samples, idx)),
    })
}
