use super::stepper::{StepRecord, Stepper};
use super::time::TimeGrid;
use crate::elliptic::{unit_vector, SolverConfig};
use crate::ensembles::CoefficientField;
use crate::lattice::{discrete_gradient, ScalarField, VectorField};
use crate::{Error, Result};

/// The semigroup `u(t)` started from `div(a e_i)`, with `phi(t) = int_0^t u`
/// and `q(t) = a (grad phi(t) + e_i)`, kept at the dyadic times.
#[derive(Debug, Clone)]
pub struct SemigroupTrajectory {
    pub a: CoefficientField,
    pub direction: usize,
    pub time_grid: TimeGrid,
    pub times: Vec<f64>,
    pub u: Vec<ScalarField>,
    pub phi: Vec<ScalarField>,
    pub q: Vec<VectorField>,
    pub steps: Vec<StepRecord>,
}

impl SemigroupTrajectory {
    pub fn t_max(&self) -> f64 {
        *self.times.last().expect("non-empty")
    }

    /// Position of `t` among the stored times.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        self.times
            .iter()
            .position(|&s| s == t)
            .ok_or_else(|| Error::param(format!("time {t} is not stored on the trajectory")))
    }

    /// `grad phi(t) + e`.
    pub fn shifted_gradient(&self, k: usize) -> VectorField {
        let e = unit_vector(self.a.grid().dim(), self.direction);
        discrete_gradient(&self.phi[k]).shifted(&e.iter().map(|x| -x).collect::<Vec<_>>())
    }

    pub fn max_flux_defect(&self) -> f64 {
        self.u
            .iter()
            .zip(&self.q)
            .map(|(u, q)| u.axpy(-1.0, &crate::lattice::discrete_divergence(q)).max_abs())
            .fold(0.0, f64::max)
    }
}

/// Runs the semigroup to `t_max` and keeps the states at `0, 1, 2, ...,
/// t_max`. `observer` sees the stepper after every step.
pub fn evolve_semigroup_with(
    a: &CoefficientField,
    direction: usize,
    t_max: f64,
    steps_per_dyad: usize,
    cfg: &SolverConfig,
    mut observer: impl FnMut(&Stepper) -> Result<()>,
) -> Result<SemigroupTrajectory> {
    let d = a.grid().dim();
    if direction >= d {
        return Err(Error::param(format!("direction {direction} out of range")));
    }
    let time_grid = TimeGrid::new(steps_per_dyad)?;
    let nodes = time_grid.dyadic_nodes(t_max)?;
    let q0 = a.flux_of_constant(&unit_vector(d, direction));
    let mut s = Stepper::new(a, q0, 0.0, time_grid, cfg)?;
    let mut traj = SemigroupTrajectory {
        a: a.clone(),
        direction,
        time_grid,
        times: Vec::with_capacity(nodes.len()),
        u: Vec::with_capacity(nodes.len()),
        phi: Vec::with_capacity(nodes.len()),
        q: Vec::with_capacity(nodes.len()),
        steps: Vec::new(),
    };
    for &n in &nodes {
        while s.node() < n {
            s.step()?;
            observer(&s)?;
        }
        traj.times.push(s.t());
        traj.u.push(s.v().clone());
        traj.phi.push(s.psi().clone());
        traj.q.push(s.flux().clone());
    }
    traj.steps = s.into_records();
    Ok(traj)
}

pub fn evolve_semigroup(
    a: &CoefficientField,
    direction: usize,
    t_max: f64,
    steps_per_dyad: usize,
    cfg: &SolverConfig,
) -> Result<SemigroupTrajectory> {
    evolve_semigroup_with(a, direction, t_max, steps_per_dyad, cfg, |_| Ok(()))
}
