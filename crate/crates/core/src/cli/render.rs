use std::fmt::Write;

use crate::experiments::ExperimentReport;
use crate::lattice::TorusGrid;

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Human-readable summary of a report.
pub fn report_table(r: &ExperimentReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "experiment  {}", r.spec.name);
    let _ = writeln!(s, "spec hash   {}", &r.spec_hash[..12]);
    let _ = writeln!(
        s,
        "grid        d={} L={}  samples {} ({} failed)  seed {}",
        r.spec.dim,
        r.spec.side,
        r.spec.samples,
        r.failures.len(),
        r.spec.master_seed
    );
    if !r.fits.is_empty() {
        let _ = writeln!(
            s,
            "\n{:<28} {:>10} {:>10} {:>10} {:>8} {:>8}  result",
            "fit", "slope", "stderr", "target", "tol", "R^2"
        );
        for f in &r.fits {
            let _ = writeln!(
                s,
                "{:<28} {:>10.4} {:>10.4} {:>10.4} {:>8.3} {:>8.4}  {}",
                f.name,
                f.fit.slope,
                f.fit.slope_stderr,
                f.target,
                f.tolerance,
                f.fit.r_squared,
                verdict(f.pass)
            );
        }
    }
    if !r.checks.is_empty() {
        let _ = writeln!(s, "\n{:<28} {:>12} {:>12}  result  detail", "check", "value", "threshold");
        for c in &r.checks {
            let _ = writeln!(
                s,
                "{:<28} {:>12.4e} {:>12.4e}  {:<6}  {}",
                c.name,
                c.value,
                c.threshold,
                verdict(c.pass),
                c.detail
            );
        }
    }
    if !r.rungs.is_empty() {
        let _ = writeln!(s, "\n{:<28} {:>12} {:>14} {:>12} {:>6}", "quantity", "parameter", "estimate", "stderr", "N");
        for g in &r.rungs {
            let _ = writeln!(
                s,
                "{:<28} {:>12} {:>14.6e} {:>12.4e} {:>6}",
                g.quantity, g.parameter, g.estimate, g.stderr, g.n
            );
        }
    }
    if !r.values.is_empty() {
        let _ = writeln!(s);
        for (k, v) in &r.values {
            let _ = writeln!(s, "{k:<28} {v:.6e}");
        }
    }
    for f in &r.failures {
        let _ = writeln!(s, "sample {} failed: {}", f.index, f.error);
    }
    let status = if r.degenerate {
        "PASS (degenerate ensemble)"
    } else {
        verdict(r.passed)
    };
    let _ = writeln!(s, "\noverall: {status}");
    s
}

/// All CSV blocks of a report, in order.
pub fn report_csv(r: &ExperimentReport) -> String {
    r.csv_blocks().iter().map(|b| b.render()).collect::<Vec<_>>().join("\n")
}

pub fn field_summary(grid: &TorusGrid, planes: &[Vec<f64>]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "d={} L={} planes={}", grid.dim(), grid.side(), planes.len());
    let _ = writeln!(s, "{:>5} {:>14} {:>14} {:>14} {:>14}", "plane", "min", "max", "mean", "rms");
    for (k, p) in planes.iter().enumerate() {
        let n = p.len() as f64;
        let min = p.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mean = p.iter().sum::<f64>() / n;
        let rms = (p.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
        let _ = writeln!(s, "{k:>5} {min:>14.6e} {max:>14.6e} {mean:>14.6e} {rms:>14.6e}");
    }
    s
}

/// One row per site: coordinates then every plane value.
pub fn field_csv(grid: &TorusGrid, planes: &[Vec<f64>]) -> String {
    let d = grid.dim();
    let mut s = String::new();
    let coords: Vec<String> = (0..d).map(|i| format!("x{i}")).collect();
    let values: Vec<String> = (0..planes.len()).map(|k| format!("c{k}")).collect();
    let _ = writeln!(s, "{},{}", coords.join(","), values.join(","));
    for site in 0..grid.sites() {
        let c = grid.coords(site);
        let mut row: Vec<String> = c[..d].iter().map(|x| x.to_string()).collect();
        row.extend(planes.iter().map(|p| format!("{:?}", p[site])));
        let _ = writeln!(s, "{}", row.join(","));
    }
    s
}
