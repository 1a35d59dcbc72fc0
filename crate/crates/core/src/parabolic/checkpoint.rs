//! Trajectory checkpoints: lattice files per stored time plus a manifest.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::stepper::StepRecord;
use super::time::TimeGrid;
use super::trajectory::SemigroupTrajectory;
use crate::ensembles::CoefficientField;
use crate::lattice::io::{read_planes, write_field};
use crate::lattice::{ScalarField, TorusGrid, VectorField};
use crate::{Error, Result};

pub const MANIFEST: &str = "trajectory.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryManifest {
    pub dim: usize,
    pub side: usize,
    pub lambda: f64,
    pub direction: usize,
    pub steps_per_dyad: usize,
    pub times: Vec<f64>,
    pub steps: Vec<StepRecord>,
}

fn names(k: usize) -> [String; 3] {
    [format!("u_{k:02}.hlf"), format!("phi_{k:02}.hlf"), format!("q_{k:02}.hlf")]
}

pub fn write_trajectory(dir: &Path, traj: &SemigroupTrajectory) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let grid = traj.a.grid();
    write_field(&dir.join("coefficients.hlf"), &traj.a.as_vector_field())?;
    for k in 0..traj.times.len() {
        let [u, phi, q] = names(k);
        write_field(&dir.join(u), &traj.u[k])?;
        write_field(&dir.join(phi), &traj.phi[k])?;
        write_field(&dir.join(q), &traj.q[k])?;
    }
    let m = TrajectoryManifest {
        dim: grid.dim(),
        side: grid.side(),
        lambda: traj.a.lambda(),
        direction: traj.direction,
        steps_per_dyad: traj.time_grid.steps_per_dyad,
        times: traj.times.clone(),
        steps: traj.steps.clone(),
    };
    let path = dir.join(MANIFEST);
    std::fs::write(&path, serde_json::to_string_pretty(&m)?).map_err(|e| Error::io(&path, e))
}

pub fn read_trajectory(dir: &Path) -> Result<SemigroupTrajectory> {
    let path = dir.join(MANIFEST);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let m: TrajectoryManifest = serde_json::from_str(&text)?;
    let grid = TorusGrid::new(m.dim, m.side)?;
    let load = |name: &str, count: usize| -> Result<Vec<Vec<f64>>> {
        let (g, planes) = read_planes(&dir.join(name))?;
        if g != grid || planes.len() != count {
            return Err(Error::Format(format!("{name}: unexpected shape")));
        }
        Ok(planes)
    };
    let a = CoefficientField::from_conductances(grid, load("coefficients.hlf", m.dim)?, m.lambda)?;
    let mut traj = SemigroupTrajectory {
        a,
        direction: m.direction,
        time_grid: TimeGrid::new(m.steps_per_dyad)?,
        times: m.times.clone(),
        u: Vec::new(),
        phi: Vec::new(),
        q: Vec::new(),
        steps: m.steps,
    };
    for k in 0..m.times.len() {
        let [u, phi, q] = names(k);
        traj.u.push(ScalarField::from_values(grid, load(&u, 1)?.remove(0))?);
        traj.phi.push(ScalarField::from_values(grid, load(&phi, 1)?.remove(0))?);
        traj.q.push(VectorField::from_components(grid, load(&q, m.dim)?)?);
    }
    Ok(traj)
}
