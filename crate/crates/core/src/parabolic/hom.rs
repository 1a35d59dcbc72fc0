use nalgebra::DMatrix;
use rustfft::num_complex::Complex64;

use super::trajectory::SemigroupTrajectory;
use crate::lattice::{discrete_divergence, Spectral, VectorField};
use crate::{Error, Result};

/// Constant-coefficient propagator, exact in time:
/// `S^hom_{t -> T} q0 = q0 + int_t^T a grad v` with `v(t) = div q0`.
/// `t_end = inf` gives the `a`-Leray projection.
pub fn propagate_s_hom(
    a_const: &DMatrix<f64>,
    q0: &VectorField,
    t: f64,
    t_end: f64,
) -> Result<VectorField> {
    let grid = *q0.grid();
    let d = grid.dim();
    if a_const.nrows() != d || a_const.ncols() != d {
        return Err(Error::param(format!(
            "coefficient must be {d}x{d}, got {}x{}",
            a_const.nrows(),
            a_const.ncols()
        )));
    }
    if !(t <= t_end) || !t.is_finite() {
        return Err(Error::param(format!("need finite t <= T, got t={t}, T={t_end}")));
    }
    let span = t_end - t;
    if span == 0.0 {
        return Ok(q0.clone());
    }
    let sp = Spectral::for_grid(&grid);
    let mut vhat = sp.forward_real(discrete_divergence(q0).values());
    let angles = sp.angles();
    let mut out: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); grid.sites()]; d];
    grid.for_each_site(|idx, k| {
        let dj: Vec<Complex64> = k[..d]
            .iter()
            .map(|&ki| Complex64::from_polar(1.0, angles[ki]) - 1.0)
            .collect();
        let mut mu = Complex64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                mu += dj[i].conj() * a_const[(i, j)] * dj[j];
            }
        }
        let weight = if mu.norm() == 0.0 {
            Complex64::new(0.0, 0.0)
        } else if span.is_infinite() {
            1.0 / mu
        } else {
            (1.0 - (-span * mu).exp()) / mu
        };
        let w = vhat[idx] * weight;
        for i in 0..d {
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..d {
                s += a_const[(i, j)] * dj[j];
            }
            out[i][idx] = s * w;
        }
    });
    vhat.clear();
    // Each output component is real, so two share one inverse transform.
    let mut comps: Vec<Vec<f64>> = Vec::with_capacity(d);
    for pair in out.chunks_mut(2) {
        if pair.len() == 2 {
            let (x, y) = pair.split_at_mut(1);
            let mut z: Vec<Complex64> = x[0]
                .iter()
                .zip(&y[0])
                .map(|(a, b)| a + Complex64::i() * b)
                .collect();
            sp.inverse(&mut z);
            comps.push(z.iter().map(|c| c.re).collect());
            comps.push(z.iter().map(|c| c.im).collect());
        } else {
            sp.inverse(&mut pair[0]);
            comps.push(pair[0].iter().map(|c| c.re).collect());
        }
    }
    let inc = VectorField::from_components(grid, comps)?;
    Ok(q0.axpy(1.0, &inc))
}

/// `q(T) - S^hom_{t -> T} q(t)` along a stored trajectory.
pub fn homogenization_error(
    traj: &SemigroupTrajectory,
    t: f64,
    t_end: f64,
    a_const: &DMatrix<f64>,
) -> Result<VectorField> {
    if t > t_end {
        return Err(Error::param(format!("need t <= T, got t={t}, T={t_end}")));
    }
    let qt = &traj.q[traj.index_of(t)?];
    let qt_end = &traj.q[traj.index_of(t_end)?];
    Ok(qt_end.axpy(-1.0, &propagate_s_hom(a_const, qt, t, t_end)?))
}
