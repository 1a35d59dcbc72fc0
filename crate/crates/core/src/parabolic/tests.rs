use nalgebra::DMatrix;

use super::checkpoint::{read_trajectory, write_trajectory};
use super::*;
use crate::elliptic::SolverConfig;
use crate::ensembles::{sample, CoefficientField, EnsembleSpec};
use crate::lattice::{
    discrete_divergence, discrete_gradient, fft_poisson_solve, skew_divergence, SkewField,
    TorusGrid, VectorField,
};

fn tight() -> SolverConfig {
    SolverConfig::with_tolerance(1e-12)
}

fn noise(n: usize, seed: u64) -> Vec<f64> {
    let mut s = seed | 1;
    (0..n)
        .map(|_| {
            s = s.wrapping_mul(0x5851f42d4c957f2d).wrapping_add(7);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect()
}

fn random_flux(g: TorusGrid, seed: u64) -> VectorField {
    let comps = (0..g.dim()).map(|i| noise(g.sites(), seed + i as u64)).collect();
    VectorField::from_components(g, comps).unwrap()
}

fn medium(side: usize, index: u64) -> CoefficientField {
    let g = TorusGrid::new(2, side).unwrap();
    sample(&EnsembleSpec::default(), &g, 21, index).unwrap()
}

#[test]
fn constant_medium_does_not_move() {
    let g = TorusGrid::new(2, 8).unwrap();
    let a = CoefficientField::constant(g, 0.7).unwrap();
    let tr = evolve_semigroup(&a, 0, 4.0, 4, &tight()).unwrap();
    assert_eq!(tr.times, vec![0.0, 1.0, 2.0, 4.0]);
    for k in 0..tr.times.len() {
        assert_eq!(tr.u[k].max_abs(), 0.0);
        assert!(tr.q[k].component(0).iter().all(|&v| v == 0.7));
        assert!(tr.q[k].component(1).iter().all(|&v| v == 0.0));
    }
}

#[test]
fn initial_state_and_flux_relation() {
    let a = medium(16, 0);
    let tr = evolve_semigroup(&a, 1, 16.0, 8, &SolverConfig::default()).unwrap();
    let u0 = discrete_divergence(&a.flux_of_constant(&[0.0, 1.0]));
    assert_eq!(tr.u[0], u0);
    assert!(tr.max_flux_defect() <= 1e-10, "{}", tr.max_flux_defect());
}

#[test]
fn energy_is_non_increasing() {
    let a = medium(16, 1);
    let mut energies = Vec::new();
    evolve_semigroup_with(&a, 0, 32.0, 8, &tight(), |s| {
        energies.push(s.v().dot(s.v()));
        Ok(())
    })
    .unwrap();
    assert_eq!(energies.len(), 8 * 6);
    for w in energies.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-12), "{} > {}", w[1], w[0]);
    }
}

#[test]
fn semigroup_composition() {
    let a = medium(16, 2);
    let q0 = random_flux(*a.grid(), 3);
    let cfg = tight();
    let direct = propagate_s(&a, &q0, 1.0, 16.0, 8, &cfg).unwrap();
    let mid = propagate_s(&a, &q0, 1.0, 4.0, 8, &cfg).unwrap();
    let composed = propagate_s(&a, &mid, 4.0, 16.0, 8, &cfg).unwrap();
    let err = composed.axpy(-1.0, &direct).max_abs();
    assert!(err <= 1e-10, "{err}");
}

#[test]
fn flux_is_propagated_along_trajectory() {
    let a = medium(16, 3);
    let tr = evolve_semigroup(&a, 0, 16.0, 8, &tight()).unwrap();
    for (t, t_end) in [(0.0, 16.0), (2.0, 8.0), (4.0, 16.0)] {
        let i = tr.index_of(t).unwrap();
        let j = tr.index_of(t_end).unwrap();
        let s = propagate_s(&a, &tr.q[i], t, t_end, 8, &tight()).unwrap();
        let err = s.axpy(-1.0, &tr.q[j]).max_abs();
        assert!(err <= 1e-10, "t={t} T={t_end}: {err}");
    }
}

#[test]
fn divergence_free_flux_is_fixed() {
    let a = medium(8, 4);
    let g = *a.grid();
    let sigma = SkewField::from_components(g, vec![noise(g.sites(), 9)]).unwrap();
    let q0 = skew_divergence(&sigma);
    assert!(discrete_divergence(&q0).max_abs() < 1e-15);
    let s = propagate_s(&a, &q0, 0.0, 4.0, 4, &tight()).unwrap();
    assert!(s.axpy(-1.0, &q0).max_abs() < 1e-15);
    let m = DMatrix::from_row_slice(2, 2, &[0.6, 0.1, 0.1, 0.8]);
    let h = propagate_s_hom(&m, &q0, 0.0, f64::INFINITY).unwrap();
    assert!(h.axpy(-1.0, &q0).max_abs() < 1e-14);
}

#[test]
fn identity_leray_projection() {
    let g = TorusGrid::new(2, 16).unwrap();
    let q0 = random_flux(g, 11);
    let got = propagate_s_hom(&DMatrix::identity(2, 2), &q0, 0.0, f64::INFINITY).unwrap();
    let psi = fft_poisson_solve(0.0, &discrete_divergence(&q0)).unwrap();
    let want = q0.axpy(1.0, &discrete_gradient(&psi));
    assert!(got.axpy(-1.0, &want).max_abs() < 1e-13);
    assert!(discrete_divergence(&got).max_abs() < 1e-13);
}

#[test]
fn leray_projection_is_idempotent() {
    let g = TorusGrid::new(3, 8).unwrap();
    let q0 = random_flux(g, 12);
    let m = DMatrix::from_row_slice(3, 3, &[0.6, 0.1, 0.0, 0.1, 0.8, 0.05, 0.0, 0.05, 0.5]);
    let once = propagate_s_hom(&m, &q0, 0.0, f64::INFINITY).unwrap();
    let twice = propagate_s_hom(&m, &once, 0.0, f64::INFINITY).unwrap();
    assert!(twice.axpy(-1.0, &once).max_abs() < 1e-12);
}

#[test]
fn hom_propagator_matches_time_stepping_to_second_order() {
    let g = TorusGrid::new(2, 16).unwrap();
    let (c0, c1) = (0.5, 0.9);
    let a = CoefficientField::from_conductances(
        g,
        vec![vec![c0; g.sites()], vec![c1; g.sites()]],
        0.25,
    )
    .unwrap();
    let m = DMatrix::from_row_slice(2, 2, &[c0, 0.0, 0.0, c1]);
    let q0 = random_flux(g, 13);
    let exact = propagate_s_hom(&m, &q0, 1.0, 8.0).unwrap();
    let errs: Vec<f64> = [8usize, 16, 32]
        .iter()
        .map(|&s| {
            propagate_s(&a, &q0, 1.0, 8.0, s, &tight())
                .unwrap()
                .axpy(-1.0, &exact)
                .max_abs()
        })
        .collect();
    assert!(errs[0] < 1e-2, "{errs:?}");
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.0..5.0).contains(&ratio), "{errs:?}");
    }
}

#[test]
fn commutator_vanishes_for_constant_medium() {
    let g = TorusGrid::new(2, 8).unwrap();
    let a = CoefficientField::constant(g, 0.4).unwrap();
    let set: Vec<_> = (0..2)
        .map(|i| evolve_semigroup(&a, i, 4.0, 4, &tight()).unwrap())
        .collect();
    let abar = centering_matrix(&[&set], None).unwrap();
    assert!((abar.clone() - DMatrix::identity(2, 2) * 0.4).abs().max() < 1e-15);
    for tr in &set {
        let c = commutator(tr, Some(2.0), &abar).unwrap();
        assert!(c.xi.max_abs() < 1e-15);
        let h = homogenization_error(tr, 1.0, 4.0, &abar).unwrap();
        assert!(h.max_abs() < 1e-15);
    }
}

#[test]
fn commutator_is_centered_across_samples() {
    let sets: Vec<Vec<SemigroupTrajectory>> = (0..4)
        .map(|n| {
            let a = medium(8, 10 + n);
            (0..2)
                .map(|i| evolve_semigroup(&a, i, 8.0, 4, &tight()).unwrap())
                .collect()
        })
        .collect();
    let refs: Vec<&[SemigroupTrajectory]> = sets.iter().map(|s| s.as_slice()).collect();
    let abar = centering_matrix(&refs, Some(8.0)).unwrap();
    for i in 0..2 {
        let mut mean = [0.0; 2];
        for s in &sets {
            let c = commutator(&s[i], None, &abar).unwrap();
            let m = c.xi.mean();
            mean[0] += m[0] / 4.0;
            mean[1] += m[1] / 4.0;
            // torus mean of q - abar (grad phi + e) is mean of Xi e
            let q = s[i].q.last().unwrap().mean();
            for j in 0..2 {
                assert!((m[j] - (q[j] - abar[(j, i)])).abs() < 1e-12);
            }
        }
        assert!(mean.iter().all(|v| v.abs() < 1e-12), "{mean:?}");
    }
    assert!(centering_matrix(&[&sets[0][..1]], None).is_err());
}

#[test]
fn homogenization_error_at_equal_times_is_zero() {
    let a = medium(8, 5);
    let tr = evolve_semigroup(&a, 0, 4.0, 4, &tight()).unwrap();
    let m = DMatrix::identity(2, 2) * 0.5;
    assert_eq!(homogenization_error(&tr, 2.0, 2.0, &m).unwrap().max_abs(), 0.0);
    assert!(homogenization_error(&tr, 3.0, 4.0, &m).is_err());
}

#[test]
fn checkpoint_roundtrip() {
    let a = medium(8, 6);
    let tr = evolve_semigroup(&a, 1, 4.0, 4, &tight()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_trajectory(dir.path(), &tr).unwrap();
    let back = read_trajectory(dir.path()).unwrap();
    assert_eq!(back.times, tr.times);
    assert_eq!(back.u, tr.u);
    assert_eq!(back.phi, tr.phi);
    assert_eq!(back.q, tr.q);
    assert_eq!(back.steps, tr.steps);
    assert_eq!(back.a.planes(), tr.a.planes());
}
