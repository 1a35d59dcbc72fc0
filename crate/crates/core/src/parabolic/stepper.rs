use serde::{Deserialize, Serialize};

use super::time::TimeGrid;
use crate::elliptic::{MassiveSolver, SolverConfig};
use crate::ensembles::CoefficientField;
use crate::lattice::{discrete_divergence, discrete_gradient, ScalarField, VectorField};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: f64,
    pub dt: f64,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Crank-Nicolson evolution of `v` with `v(t0) = div q0`, accumulating
/// `psi = int v` by the trapezoid rule and the flux `q0 + a grad psi`.
///
/// After every step `v` is reset to `div q`, so `v = div q` holds at every
/// node up to rounding.
pub struct Stepper<'a> {
    a: &'a CoefficientField,
    grid: TimeGrid,
    cfg: SolverConfig,
    node: usize,
    q0: VectorField,
    v: ScalarField,
    psi: ScalarField,
    flux: VectorField,
    solver: Option<(f64, MassiveSolver<'a>)>,
    records: Vec<StepRecord>,
}

impl<'a> Stepper<'a> {
    pub fn new(
        a: &'a CoefficientField,
        q0: VectorField,
        t0: f64,
        grid: TimeGrid,
        cfg: &SolverConfig,
    ) -> Result<Self> {
        a.grid().check_same(q0.grid())?;
        cfg.validate()?;
        let node = grid.node(t0)?;
        let v = discrete_divergence(&q0);
        let psi = ScalarField::zeros(*a.grid());
        Ok(Self {
            a,
            grid,
            cfg: *cfg,
            node,
            flux: q0.clone(),
            q0,
            v,
            psi,
            solver: None,
            records: Vec::new(),
        })
    }

    pub fn t(&self) -> f64 {
        self.grid.time(self.node)
    }

    pub fn node(&self) -> usize {
        self.node
    }

    pub fn time_grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn v(&self) -> &ScalarField {
        &self.v
    }

    /// `int_{t0}^t v`.
    pub fn psi(&self) -> &ScalarField {
        &self.psi
    }

    pub fn flux(&self) -> &VectorField {
        &self.flux
    }

    pub fn records(&self) -> &[StepRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<StepRecord> {
        self.records
    }

    /// Advances one step and returns its length.
    pub fn step(&mut self) -> Result<f64> {
        let dt = self.grid.step(self.node);
        let mass = 2.0 / dt;
        if self.solver.as_ref().map(|(m, _)| *m) != Some(mass) {
            self.solver = Some((mass, MassiveSolver::new(self.a, mass, &self.cfg)?));
        }
        let solver = &mut self.solver.as_mut().expect("solver").1;

        // (m + A) v* = m v - A v = 2 m v - (m + A) v, with m = 2 / dt.
        let v = self.v.values();
        let mut rhs = vec![0.0; v.len()];
        solver.apply(v, &mut rhs);
        for (r, x) in rhs.iter_mut().zip(v) {
            *r = 2.0 * mass * x - *r;
        }
        let (next, report) = solver.solve(&rhs, Some(v))?;

        let half = 0.5 * dt;
        let psi: Vec<f64> = self
            .psi
            .values()
            .iter()
            .zip(v)
            .zip(&next)
            .map(|((p, a), b)| p + half * (a + b))
            .collect();
        self.psi = ScalarField::from_raw(*self.a.grid(), psi);
        let zero = vec![0.0; self.a.grid().dim()];
        self.flux = self
            .q0
            .axpy(1.0, &self.a.flux(&discrete_gradient(&self.psi), &zero));
        self.v = discrete_divergence(&self.flux);
        self.records.push(StepRecord {
            t: self.t(),
            dt,
            iterations: report.iterations,
            relative_residual: report.relative_residual,
        });
        self.node += 1;
        Ok(dt)
    }

    /// Steps until time `t`, which must be a later node.
    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        let target = self.grid.node(t)?;
        if target < self.node {
            return Err(crate::Error::param(format!(
                "cannot step back from {} to {t}",
                self.t()
            )));
        }
        while self.node < target {
            self.step()?;
        }
        Ok(())
    }
}

/// `S_{t -> T} q0 = q0 + int_t^T a grad v`, with `v(t) = div q0`.
pub fn propagate_s(
    a: &CoefficientField,
    q0: &VectorField,
    t: f64,
    t_end: f64,
    steps_per_dyad: usize,
    cfg: &SolverConfig,
) -> Result<VectorField> {
    if !(t < t_end) {
        return Err(crate::Error::param(format!("need t < T, got t={t}, T={t_end}")));
    }
    let grid = TimeGrid::new(steps_per_dyad)?;
    grid.node(t_end)?;
    let mut s = Stepper::new(a, q0.clone(), t, grid, cfg)?;
    s.advance_to(t_end)?;
    Ok(s.flux)
}
