//! TOML run configuration with flat sections:
//!
//! ```toml
//! [experiment]
//! name = "E3-semigroup-decay"   # required
//! samples = 100
//! master_seed = 1
//!
//! [grid]
//! dim = 2                        # required
//! side = 256                     # required
//!
//! [ensemble]
//! kind = "bernoulli"
//! lambda = 0.25
//! p = 0.5
//!
//! [ladder]
//! t = [4, 8, 16]
//!
//! [solver]
//! rel_tolerance = 1e-9
//! preconditioner = "spectral"
//! steps_per_dyad = 8
//!
//! [run]
//! output_dir = "runs"
//! workers = 4
//! log_level = "info"
//! ```
//!
//! Omitted keys take the preset value for the experiment and grid.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::elliptic::Preconditioner;
use crate::ensembles::EnsembleSpec;
use crate::experiments::{ExperimentName, ExperimentSpec, Ladder};
use crate::{Error, Result};

pub const WORKERS_ENV: &str = "HOMOG_WORKERS";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    experiment: ExperimentSection,
    grid: GridSection,
    #[serde(default)]
    ensemble: Option<EnsembleSpec>,
    #[serde(default)]
    ladder: Ladder,
    #[serde(default)]
    solver: SolverSection,
    #[serde(default)]
    run: RunSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentSection {
    name: String,
    samples: Option<usize>,
    master_seed: Option<u64>,
    delta: Option<f64>,
    pilot_samples: Option<usize>,
    dry_run: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    dim: usize,
    side: usize,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverSection {
    rel_tolerance: Option<f64>,
    max_iterations: Option<usize>,
    preconditioner: Option<Preconditioner>,
    steps_per_dyad: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunSection {
    output_dir: Option<PathBuf>,
    workers: Option<usize>,
    log_level: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: ExperimentSpec,
    pub output_dir: PathBuf,
    pub workers: usize,
    pub log_level: String,
}

/// 1-based line of byte `offset` in `text`.
fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line where `key` is assigned inside `[section]`, if present.
fn locate(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (n, line) in text.lines().enumerate() {
        let t = line.trim();
        if let Some(name) = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            current = name.trim().to_string();
            if key.is_empty() && current == section {
                return Some(n + 1);
            }
        } else if current == section {
            if let Some((k, _)) = t.split_once('=') {
                if k.trim() == key {
                    return Some(n + 1);
                }
            }
        }
    }
    None
}

fn anchored(path: &Path, line: Option<usize>, msg: impl std::fmt::Display) -> Error {
    match line {
        Some(l) => Error::Config(format!("{}:{l}: {msg}", path.display())),
        None => Error::Config(format!("{}: {msg}", path.display())),
    }
}

fn toml_error(path: &Path, text: &str, e: &toml::de::Error) -> Error {
    let line = e.span().map(|s| line_of(text, s.start));
    anchored(path, line, e.message().trim())
}

/// Applies `section.key=value`; values parse as TOML, falling back to a
/// bare string.
fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("--set expects section.key=value, got `{assignment}`")))?;
    let (section, field) = key
        .trim()
        .split_once('.')
        .ok_or_else(|| Error::Config(format!("--set key must be section.key, got `{key}`")))?;
    let value = toml::from_str::<toml::Table>(&format!("v = {}", raw.trim()))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    let entry = table
        .entry(section.to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    match entry {
        toml::Value::Table(t) => {
            t.insert(field.to_string(), value);
            Ok(())
        }
        _ => Err(Error::Config(format!("`{section}` is not a section"))),
    }
}

fn workers_from_env() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| Error::Config(format!("{WORKERS_ENV} must be a positive integer, got `{v}`"))),
        Err(_) => Ok(None),
    }
}

impl RunConfig {
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(path, &text, overrides)
    }

    /// `path` only labels error messages.
    pub fn parse(path: &Path, text: &str, overrides: &[String]) -> Result<Self> {
        // Schema errors on the file as written carry line numbers.
        toml::from_str::<ConfigFile>(text).map_err(|e| toml_error(path, text, &e))?;
        let mut table: toml::Table = toml::from_str(text).map_err(|e| toml_error(path, text, &e))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let file: ConfigFile = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("after --set: {}", e.message().trim())))?;

        let name = ExperimentName::parse(&file.experiment.name)
            .map_err(|e| anchored(path, locate(text, "experiment", "name"), e))?;
        let mut spec = ExperimentSpec::preset(name, file.grid.dim, file.grid.side);
        let e = &file.experiment;
        spec.samples = e.samples.unwrap_or(spec.samples);
        spec.master_seed = e.master_seed.unwrap_or(spec.master_seed);
        spec.delta = e.delta.unwrap_or(spec.delta);
        spec.pilot_samples = e.pilot_samples.unwrap_or(spec.pilot_samples);
        spec.dry_run = e.dry_run.unwrap_or(spec.dry_run);
        if let Some(ens) = file.ensemble {
            spec.ensemble = ens;
        }
        spec.ladder = file.ladder;
        spec.fill_defaults();
        let s = &file.solver;
        spec.solver.rel_tolerance = s.rel_tolerance.unwrap_or(spec.solver.rel_tolerance);
        spec.solver.max_iterations = s.max_iterations.or(spec.solver.max_iterations);
        spec.solver.preconditioner = s.preconditioner.unwrap_or(spec.solver.preconditioner);
        spec.steps_per_dyad = s.steps_per_dyad.unwrap_or(spec.steps_per_dyad);
        spec.validate()
            .map_err(|e| anchored(path, locate(text, "experiment", ""), format!("invalid experiment: {e}")))?;

        let workers = match file.run.workers {
            Some(w) => w,
            None => workers_from_env()?.unwrap_or(1),
        };
        if workers == 0 {
            return Err(anchored(path, locate(text, "run", "workers"), "workers must be >= 1"));
        }
        Ok(Self {
            experiment: spec,
            output_dir: file.run.output_dir.unwrap_or_else(|| PathBuf::from("runs")),
            workers,
            log_level: file.run.log_level.unwrap_or_else(|| "info".to_string()),
        })
    }
}
