use nalgebra::DMatrix;

use super::trajectory::SemigroupTrajectory;
use crate::lattice::VectorField;
use crate::{Error, Result};

/// `Xi(t) e = q(t) - abar (grad phi(t) + e)` for one direction.
#[derive(Debug, Clone)]
pub struct CommutatorField {
    pub t: f64,
    pub direction: usize,
    pub xi: VectorField,
    pub abar: DMatrix<f64>,
}

fn resolve_time(traj: &SemigroupTrajectory, t: Option<f64>) -> f64 {
    t.unwrap_or_else(|| traj.t_max())
}

/// Column `i` is the cross-sample mean of the torus mean of `q_i(t)`.
/// Each entry of `samples` holds the trajectories of one realization,
/// one per direction in order. `t = None` takes the last stored time.
pub fn centering_matrix(samples: &[&[SemigroupTrajectory]], t: Option<f64>) -> Result<DMatrix<f64>> {
    let first = samples
        .first()
        .and_then(|s| s.first())
        .ok_or_else(|| Error::param("centering needs at least one sample"))?;
    let d = first.a.grid().dim();
    let t = resolve_time(first, t);
    let mut m = DMatrix::zeros(d, d);
    for (n, set) in samples.iter().enumerate() {
        if set.len() != d || set.iter().enumerate().any(|(i, tr)| tr.direction != i) {
            return Err(Error::param(format!(
                "sample {n}: need one trajectory per direction 0..{d}"
            )));
        }
        for (i, tr) in set.iter().enumerate() {
            let mean = tr.q[tr.index_of(t)?].mean();
            for (j, v) in mean.into_iter().enumerate() {
                m[(j, i)] += v;
            }
        }
    }
    Ok(m / samples.len() as f64)
}

pub fn commutator(
    traj: &SemigroupTrajectory,
    t: Option<f64>,
    abar: &DMatrix<f64>,
) -> Result<CommutatorField> {
    let t = resolve_time(traj, t);
    let k = traj.index_of(t)?;
    let grid = *traj.a.grid();
    let d = grid.dim();
    if abar.nrows() != d || abar.ncols() != d {
        return Err(Error::param(format!("centering matrix must be {d}x{d}")));
    }
    let g = traj.shifted_gradient(k);
    let q = &traj.q[k];
    let comps = (0..d)
        .map(|i| {
            (0..grid.sites())
                .map(|x| {
                    let ag: f64 = (0..d).map(|j| abar[(i, j)] * g.component(j)[x]).sum();
                    q.component(i)[x] - ag
                })
                .collect()
        })
        .collect();
    Ok(CommutatorField {
        t,
        direction: traj.direction,
        xi: VectorField::from_components(grid, comps)?,
        abar: abar.clone(),
    })
}
