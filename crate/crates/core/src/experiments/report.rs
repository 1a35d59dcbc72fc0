use serde::{Deserialize, Serialize};

use super::spec::ExperimentSpec;
use crate::statistics::{CsvBlock, RateFit};

/// A tolerance check on a fitted exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitCheck {
    pub name: String,
    pub fit: RateFit,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl FitCheck {
    pub fn slope(name: impl Into<String>, fit: RateFit, target: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            pass: (fit.slope - target).abs() <= tolerance,
            fit,
            target,
            tolerance,
        }
    }
}

/// Any other pass/fail criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    /// Passes when `value <= threshold`.
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass: value <= threshold,
            value,
            threshold,
            detail: detail.into(),
        }
    }

    /// Passes when `value >= threshold`.
    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass: value >= threshold,
            value,
            threshold,
            detail: detail.into(),
        }
    }

    pub fn flag(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            value: pass as u8 as f64,
            threshold: 1.0,
            pass,
            detail: detail.into(),
        }
    }
}

/// One row of estimates: a quantity at a ladder parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rung {
    pub quantity: String,
    pub parameter: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleFailure {
    pub index: u64,
    pub error: String,
}

/// Seeds used: realization `index` draws from `(master_seed, index)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedManifest {
    pub master_seed: u64,
    pub indices: Vec<u64>,
    pub pilot_indices: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    pub spec_hash: String,
    pub rungs: Vec<Rung>,
    pub fits: Vec<FitCheck>,
    pub checks: Vec<Check>,
    /// Extra named numbers (pilot coefficients, reference values, ...).
    pub values: Vec<(String, f64)>,
    pub failures: Vec<SampleFailure>,
    pub seeds: SeedManifest,
    pub degenerate: bool,
    pub passed: bool,
}

impl ExperimentReport {
    pub fn new(spec: &ExperimentSpec) -> Self {
        Self {
            spec: spec.clone(),
            spec_hash: spec.hash(),
            rungs: Vec::new(),
            fits: Vec::new(),
            checks: Vec::new(),
            values: Vec::new(),
            failures: Vec::new(),
            seeds: SeedManifest {
                master_seed: spec.master_seed,
                indices: Vec::new(),
                pilot_indices: Vec::new(),
            },
            degenerate: false,
            passed: false,
        }
    }

    pub fn rung(&mut self, quantity: &str, parameter: f64, estimate: f64, stderr: f64, n: usize) {
        self.rungs.push(Rung {
            quantity: quantity.to_string(),
            parameter,
            estimate,
            stderr,
            n,
        });
    }

    pub fn value(&mut self, name: impl Into<String>, v: f64) {
        self.values.push((name.into(), v));
    }

    /// Sets `passed` from the fits and checks.
    pub fn finish(&mut self) {
        self.passed = self.fits.iter().all(|f| f.pass) && self.checks.iter().all(|c| c.pass);
    }

    /// Rungs grouped by quantity, in first-appearance order.
    pub fn csv_blocks(&self) -> Vec<CsvBlock> {
        let mut blocks: Vec<CsvBlock> = Vec::new();
        for r in &self.rungs {
            let pos = match blocks.iter().position(|b| b.name == r.quantity) {
                Some(p) => p,
                None => {
                    blocks.push(CsvBlock::new(r.quantity.clone()));
                    blocks.len() - 1
                }
            };
            blocks[pos].push(r.parameter, r.estimate, r.stderr, r.n);
        }
        blocks
    }
}
