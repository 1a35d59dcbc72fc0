use serde::{Deserialize, Serialize};

use crate::ensembles::CoefficientField;
use crate::lattice::{apply_elliptic, ScalarField, Spectral, TorusGrid};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Preconditioner {
    None,
    /// Jacobi scaling by the operator diagonal, mass term included.
    DiagonalMass,
    /// Constant-coefficient solve with the per-axis mean conductance.
    #[default]
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_tol")]
    pub rel_tolerance: f64,
    /// Defaults to `10 L^d` when absent.
    #[serde(default)]
    pub max_iterations: Option<usize>,
    #[serde(default)]
    pub preconditioner: Preconditioner,
}

fn default_tol() -> f64 {
    1e-9
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rel_tolerance: default_tol(),
            max_iterations: None,
            preconditioner: Preconditioner::default(),
        }
    }
}

impl SolverConfig {
    pub fn with_tolerance(rel_tolerance: f64) -> Self {
        Self {
            rel_tolerance,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tolerance > 0.0 && self.rel_tolerance <= 1e-3) {
            return Err(Error::param(format!(
                "rel_tolerance must lie in (0, 1e-3], got {}",
                self.rel_tolerance
            )));
        }
        if self.max_iterations == Some(0) {
            return Err(Error::param("max_iterations must be >= 1"));
        }
        Ok(())
    }

    pub fn iteration_cap(&self, grid: &TorusGrid) -> usize {
        self.max_iterations.unwrap_or(10 * grid.sites())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// True relative residual `|b - A x| / |b|` of the returned iterate.
    pub relative_residual: f64,
    /// Relative norm of the smoothed residual at every iteration; this
    /// sequence never increases.
    pub residual_history: Vec<f64>,
}

enum Precond {
    None,
    Diagonal(Vec<f64>),
    Spectral(std::sync::Arc<Spectral>, Vec<f64>),
}

/// Reusable solver for `(mass I - div a grad) x = b`.
///
/// Plain preconditioned CG, with minimal-residual smoothing of the iterates
/// so that the reported residual norms are monotone.
pub struct MassiveSolver<'a> {
    a: &'a CoefficientField,
    mass: f64,
    cfg: SolverConfig,
    precond: Precond,
    scratch: Vec<f64>,
}

impl<'a> MassiveSolver<'a> {
    pub fn new(a: &'a CoefficientField, mass: f64, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        if !(mass >= 0.0 && mass.is_finite()) {
            return Err(Error::param(format!("mass must be finite and >= 0, got {mass}")));
        }
        let grid = *a.grid();
        let precond = match cfg.preconditioner {
            Preconditioner::None => Precond::None,
            Preconditioner::DiagonalMass => {
                let mut diag = vec![mass; grid.sites()];
                for (axis, plane) in a.planes().iter().enumerate() {
                    let mut shift = [0i64; 3];
                    shift[axis] = -1;
                    for x in 0..grid.sites() {
                        diag[x] += plane[x] + plane[grid.offset(x, &shift[..grid.dim()])];
                    }
                }
                Precond::Diagonal(diag.iter().map(|v| 1.0 / v).collect())
            }
            Preconditioner::Spectral => {
                let sp = Spectral::for_grid(&grid);
                let abar = a.mean_per_axis();
                let line = sp.line_symbol().to_vec();
                let sym = sp.symbol_from_modes(|k| {
                    let s = mass + k.iter().zip(&abar).map(|(&ki, c)| c * line[ki]).sum::<f64>();
                    if s > 0.0 {
                        1.0 / s
                    } else {
                        0.0
                    }
                });
                Precond::Spectral(sp, sym)
            }
        };
        Ok(Self {
            a,
            mass,
            cfg: *cfg,
            precond,
            scratch: vec![0.0; grid.sites()],
        })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn apply(&mut self, x: &[f64], out: &mut [f64]) {
        apply_elliptic(
            self.a.grid(),
            self.a.planes(),
            self.mass,
            x,
            out,
            &mut self.scratch,
        );
    }

    fn precondition(&self, r: &[f64], z: &mut [f64]) {
        match &self.precond {
            Precond::None => z.copy_from_slice(r),
            Precond::Diagonal(inv) => {
                for ((zi, ri), di) in z.iter_mut().zip(r).zip(inv) {
                    *zi = ri * di;
                }
            }
            Precond::Spectral(sp, sym) => z.copy_from_slice(&sp.filter(r, sym)),
        }
    }

    /// Solves with an optional initial guess.
    pub fn solve(&mut self, b: &[f64], guess: Option<&[f64]>) -> Result<(Vec<f64>, SolveReport)> {
        let n = b.len();
        let grid = *self.a.grid();
        if self.mass == 0.0 {
            crate::lattice::check_mean_free(b)?;
        }
        let b_norm = norm(b);
        if b_norm == 0.0 {
            return Ok((
                vec![0.0; n],
                SolveReport {
                    iterations: 0,
                    relative_residual: 0.0,
                    residual_history: vec![0.0],
                },
            ));
        }
        let tol = self.cfg.rel_tolerance;
        let cap = self.cfg.iteration_cap(&grid);

        let mut x = guess.map(|g| g.to_vec()).unwrap_or_else(|| vec![0.0; n]);
        let mut r = vec![0.0; n];
        self.apply(&x, &mut r);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        let mut y = x.clone();
        let mut s = r.clone();
        let mut s_norm = norm(&s);
        let mut history = vec![s_norm / b_norm];
        let mut z = vec![0.0; n];
        self.precondition(&r, &mut z);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut q = vec![0.0; n];
        let mut iterations = 0;

        while s_norm / b_norm > tol {
            if iterations >= cap {
                return Err(Error::Convergence {
                    iterations,
                    residual: s_norm / b_norm,
                });
            }
            iterations += 1;
            self.apply(&p, &mut q);
            let pq = dot(&p, &q);
            if !(pq > 0.0) {
                break;
            }
            let alpha = rz / pq;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * q[i];
            }
            // Minimal-residual smoothing: s <- s + eta (r - s).
            let mut sd = 0.0;
            let mut dd = 0.0;
            for i in 0..n {
                let d = r[i] - s[i];
                sd += s[i] * d;
                dd += d * d;
            }
            if dd > 0.0 {
                let eta = -sd / dd;
                let mut cand = 0.0;
                for i in 0..n {
                    let v = s[i] + eta * (r[i] - s[i]);
                    cand += v * v;
                }
                let cand = cand.sqrt();
                if cand <= s_norm {
                    for i in 0..n {
                        s[i] += eta * (r[i] - s[i]);
                        y[i] += eta * (x[i] - y[i]);
                    }
                    s_norm = cand;
                }
            }
            history.push(s_norm / b_norm);
            self.precondition(&r, &mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }

        if self.mass == 0.0 {
            let m = y.iter().sum::<f64>() / n as f64;
            y.iter_mut().for_each(|v| *v -= m);
        }
        let mut ay = vec![0.0; n];
        self.apply(&y, &mut ay);
        let true_res = norm(&ay.iter().zip(b).map(|(u, v)| v - u).collect::<Vec<_>>()) / b_norm;
        Ok((
            y,
            SolveReport {
                iterations,
                relative_residual: true_res,
                residual_history: history,
            },
        ))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `((1/T) I - div a grad) u = rhs`. `T = inf` drops the mass term,
/// which requires a mean-free right-hand side.
pub fn solve_massive_elliptic(
    a: &CoefficientField,
    t: f64,
    rhs: &ScalarField,
    cfg: &SolverConfig,
) -> Result<ScalarField> {
    Ok(solve_massive_elliptic_report(a, t, rhs, cfg)?.0)
}

pub fn solve_massive_elliptic_report(
    a: &CoefficientField,
    t: f64,
    rhs: &ScalarField,
    cfg: &SolverConfig,
) -> Result<(ScalarField, SolveReport)> {
    a.grid().check_same(rhs.grid())?;
    let mass = mass_of(t)?;
    let mut solver = MassiveSolver::new(a, mass, cfg)?;
    let (x, report) = solver.solve(rhs.values(), None)?;
    Ok((ScalarField::from_raw(*a.grid(), x), report))
}

/// `1/T`, with `T = inf` mapped to zero.
pub fn mass_of(t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::param(format!("cutoff T must be > 0, got {t}")));
    }
    Ok(if t.is_infinite() { 0.0 } else { 1.0 / t })
}
