use serde::{Deserialize, Serialize};

/// Number of delete-a-group blocks used once the sample exceeds it.
pub const JACKKNIFE_GROUPS: usize = 200;

/// A point estimate with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    /// `|value - other| / combined stderr`.
    pub fn z_against(&self, other: &Estimate) -> f64 {
        let s = self.stderr.hypot(other.stderr);
        if s == 0.0 {
            if self.value == other.value {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.value - other.value).abs() / s
        }
    }

    /// `|value| <= k * stderr`.
    pub fn within(&self, k: f64) -> bool {
        self.value.abs() <= k * self.stderr
    }
}

/// Jackknife estimate of `stat` over `n` samples.
///
/// `stat` receives the retained sample indices. With more than
/// [`JACKKNIFE_GROUPS`] samples, contiguous blocks are deleted instead of
/// single samples.
pub fn jackknife(n: usize, stat: impl Fn(&[usize]) -> f64) -> Estimate {
    let all: Vec<usize> = (0..n).collect();
    let value = stat(&all);
    if n < 2 {
        return Estimate {
            value,
            stderr: f64::NAN,
        };
    }
    let g = n.min(JACKKNIFE_GROUPS);
    let bounds: Vec<usize> = (0..=g).map(|k| k * n / g).collect();
    let mut keep = Vec::with_capacity(n);
    let partial: Vec<f64> = (0..g)
        .map(|k| {
            keep.clear();
            keep.extend((0..bounds[k]).chain(bounds[k + 1]..n));
            stat(&keep)
        })
        .collect();
    let mean = partial.iter().sum::<f64>() / g as f64;
    let var = partial.iter().map(|p| (p - mean).powi(2)).sum::<f64>() * (g - 1) as f64 / g as f64;
    Estimate {
        value,
        stderr: var.sqrt(),
    }
}

pub fn mean_of(values: &[f64], idx: &[usize]) -> f64 {
    idx.iter().map(|&i| values[i]).sum::<f64>() / idx.len() as f64
}

/// Unbiased sample variance over the selected indices.
pub fn variance_of(values: &[f64], idx: &[usize]) -> f64 {
    let m = mean_of(values, idx);
    idx.iter().map(|&i| (values[i] - m).powi(2)).sum::<f64>() / (idx.len() as f64 - 1.0)
}

pub fn covariance_of(x: &[f64], y: &[f64], idx: &[usize]) -> f64 {
    let (mx, my) = (mean_of(x, idx), mean_of(y, idx));
    idx.iter()
        .map(|&i| (x[i] - mx) * (y[i] - my))
        .sum::<f64>()
        / (idx.len() as f64 - 1.0)
}

/// Sample mean with the usual `s / sqrt(n)` error.
pub fn mean_estimate(values: &[f64]) -> Estimate {
    let idx: Vec<usize> = (0..values.len()).collect();
    let value = mean_of(values, &idx);
    let stderr = if values.len() > 1 {
        (variance_of(values, &idx) / values.len() as f64).sqrt()
    } else {
        f64::NAN
    };
    Estimate { value, stderr }
}

/// Pearson correlation with a jackknife error.
pub fn correlation(x: &[f64], y: &[f64]) -> Estimate {
    assert_eq!(x.len(), y.len(), "paired samples");
    jackknife(x.len(), |idx| {
        let c = covariance_of(x, y, idx);
        let v = (variance_of(x, idx) * variance_of(y, idx)).sqrt();
        if v == 0.0 {
            0.0
        } else {
            c / v
        }
    })
}
