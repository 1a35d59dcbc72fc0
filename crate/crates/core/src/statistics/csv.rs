//! CSV blocks.
//!
//! Schema `homlab-csv/1`: a `# block: <name>` comment line, a `# schema:`
//! line, then the header `parameter,estimate,stderr,N` and one row per scale
//! or time. Floats use Rust's shortest round-trip formatting.

use serde::{Deserialize, Serialize};

pub const CSV_SCHEMA: &str = "homlab-csv/1";
pub const CSV_HEADER: &str = "parameter,estimate,stderr,N";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub parameter: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvBlock {
    pub name: String,
    pub rows: Vec<CsvRow>,
}

impl CsvBlock {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, parameter: f64, estimate: f64, stderr: f64, n: usize) {
        self.rows.push(CsvRow {
            parameter,
            estimate,
            stderr,
            n,
        });
    }

    pub fn render(&self) -> String {
        let mut s = format!("# block: {}\n# schema: {CSV_SCHEMA}\n{CSV_HEADER}\n", self.name);
        for r in &self.rows {
            s.push_str(&format!("{:?},{:?},{:?},{}\n", r.parameter, r.estimate, r.stderr, r.n));
        }
        s
    }
}
