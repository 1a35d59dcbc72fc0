use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::report::SampleFailure;
use crate::{Error, Result};

/// Round-robin assignment of sample indices to workers. Results are always
/// reduced in index order, so the plan only affects who computes what.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkPlan {
    pub workers: usize,
    pub assignments: Vec<Vec<u64>>,
}

pub fn schedule(indices: &[u64], workers: usize) -> Result<WorkPlan> {
    if workers == 0 {
        return Err(Error::param("workers must be >= 1"));
    }
    let mut assignments = vec![Vec::new(); workers];
    for (k, &i) in indices.iter().enumerate() {
        assignments[k % workers].push(i);
    }
    Ok(WorkPlan {
        workers,
        assignments,
    })
}

/// Execution settings shared by all experiments.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub workers: usize,
    /// JSON-lines file of finished samples; reused on resume.
    pub checkpoint: Option<PathBuf>,
}

impl RunContext {
    pub fn serial() -> Self {
        Self {
            workers: 1,
            checkpoint: None,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Record<T> {
    index: u64,
    #[serde(default = "none")]
    ok: Option<T>,
    #[serde(default)]
    error: Option<String>,
}

fn none<T>() -> Option<T> {
    None
}

/// Successful samples in index order plus the recorded failures.
#[derive(Debug, Clone)]
pub struct Collected<T> {
    pub ok: Vec<(u64, T)>,
    pub failures: Vec<SampleFailure>,
}

impl<T> Collected<T> {
    pub fn values(&self) -> impl Iterator<Item = &T> {
        self.ok.iter().map(|(_, v)| v)
    }

    pub fn len(&self) -> usize {
        self.ok.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ok.is_empty()
    }
}

fn load_checkpoint<T: DeserializeOwned>(path: &Path) -> Result<BTreeMap<u64, Record<T>>> {
    let mut done = BTreeMap::new();
    let file = match std::fs::File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(done),
        Err(e) => return Err(Error::io(path, e)),
    };
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        // A torn final line from an interrupted run is skipped.
        if let Ok(r) = serde_json::from_str::<Record<T>>(&line) {
            done.insert(r.index, r);
        }
    }
    Ok(done)
}

/// Runs `work` for each index not yet in the checkpoint and returns all
/// results in index order.
pub fn run_samples<T, F>(ctx: &RunContext, indices: &[u64], work: F) -> Result<Collected<T>>
where
    T: Serialize + DeserializeOwned + Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    let mut done: BTreeMap<u64, Record<T>> = match &ctx.checkpoint {
        Some(p) => load_checkpoint(p)?,
        None => BTreeMap::new(),
    };
    let pending: Vec<u64> = indices
        .iter()
        .copied()
        .filter(|i| !done.contains_key(i))
        .collect();
    let sink = match &ctx.checkpoint {
        Some(p) => {
            // Make sure a torn last line does not swallow the next record.
            let needs_newline = std::fs::read(p)
                .map(|b| b.last().is_some_and(|&c| c != b'\n'))
                .unwrap_or(false);
            let mut f = OpenOptions::new()
                .create(true)
                .append(true)
                .open(p)
                .map_err(|e| Error::io(p, e))?;
            if needs_newline {
                f.write_all(b"\n").map_err(|e| Error::io(p, e))?;
            }
            Some(Mutex::new(f))
        }
        None => None,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(ctx.workers.max(1))
        .build()
        .map_err(|e| Error::param(format!("thread pool: {e}")))?;
    let total = indices.len();
    let fresh: Vec<Result<Record<T>>> = pool.install(|| {
        pending
            .par_iter()
            .map(|&index| {
                let rec = match work(index) {
                    Ok(v) => Record {
                        index,
                        ok: Some(v),
                        error: None,
                    },
                    Err(e) => {
                        log::warn!("sample {index} failed: {e}");
                        Record {
                            index,
                            ok: None,
                            error: Some(e.to_string()),
                        }
                    }
                };
                if let (Some(sink), Some(p)) = (&sink, &ctx.checkpoint) {
                    let mut line = serde_json::to_string(&rec)?;
                    line.push('\n');
                    let mut f = sink.lock().expect("checkpoint lock");
                    f.write_all(line.as_bytes()).map_err(|e| Error::io(p, e))?;
                    f.flush().map_err(|e| Error::io(p, e))?;
                }
                log::info!("sample {index} of {total} done");
                Ok(rec)
            })
            .collect()
    });
    for r in fresh {
        let r = r?;
        done.insert(r.index, r);
    }
    let mut out = Collected {
        ok: Vec::with_capacity(indices.len()),
        failures: Vec::new(),
    };
    for &i in indices {
        let r = done.remove(&i).expect("every index ran");
        match (r.ok, r.error) {
            (Some(v), _) => out.ok.push((i, v)),
            (None, e) => out.failures.push(SampleFailure {
                index: i,
                error: e.unwrap_or_else(|| "missing result".into()),
            }),
        }
    }
    Ok(out)
}
