use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::solver::{mass_of, MassiveSolver, SolveReport, SolverConfig};
use crate::ensembles::CoefficientField;
use crate::lattice::{
    curl_rhs, discrete_divergence, discrete_gradient, skew_divergence, ScalarField, SkewField,
    Spectral, VectorField,
};
use crate::{Error, Result};

/// Massive corrector `phi_T` in direction `e_i` and its flux `q_T`.
#[derive(Debug, Clone)]
pub struct Corrector {
    pub t: f64,
    pub direction: usize,
    pub phi: ScalarField,
    pub flux: VectorField,
    pub report: SolveReport,
}

pub fn unit_vector(dim: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; dim];
    e[i] = 1.0;
    e
}

/// Right-hand side `div(a e_i)` of the corrector equation.
pub fn corrector_rhs(a: &CoefficientField, direction: usize) -> ScalarField {
    discrete_divergence(&a.flux_of_constant(&unit_vector(a.grid().dim(), direction)))
}

/// Solves `(1/T) phi - div a (grad phi + e_i) = 0`; `T = inf` gives the
/// periodic corrector.
pub fn modified_corrector(
    a: &CoefficientField,
    t: f64,
    direction: usize,
    cfg: &SolverConfig,
) -> Result<Corrector> {
    modified_corrector_with_guess(a, t, direction, cfg, None)
}

pub fn modified_corrector_with_guess(
    a: &CoefficientField,
    t: f64,
    direction: usize,
    cfg: &SolverConfig,
    guess: Option<&ScalarField>,
) -> Result<Corrector> {
    let grid = *a.grid();
    if direction >= grid.dim() {
        return Err(Error::param(format!("direction {direction} out of range")));
    }
    let rhs = corrector_rhs(a, direction);
    let mut solver = MassiveSolver::new(a, mass_of(t)?, cfg)?;
    let (x, report) = solver.solve(rhs.values(), guess.map(|g| g.values()))?;
    let phi = ScalarField::from_raw(grid, x);
    let flux = a.flux(&discrete_gradient(&phi), &unit_vector(grid.dim(), direction));
    Ok(Corrector {
        t,
        direction,
        phi,
        flux,
        report,
    })
}

/// `(1/T) sigma_jk - Delta sigma_jk = D_j q_k - D_k q_j`, solved spectrally.
pub fn vector_potential(q: &VectorField, t: f64) -> Result<SkewField> {
    let grid = *q.grid();
    let mass = mass_of(t)?;
    let sp = Spectral::for_grid(&grid);
    let sym = sp.resolvent_symbol(mass);
    let rhs: Vec<Vec<f64>> = SkewField::pairs(grid.dim())
        .into_iter()
        .map(|(j, k)| curl_rhs(q, j, k).into_values())
        .collect();
    let refs: Vec<&[f64]> = rhs.iter().map(|v| v.as_slice()).collect();
    Ok(SkewField::from_raw(grid, sp.filter_many(&refs, &sym)))
}

/// `g - T Delta g = q - <q> - grad phi`, with `<.>` the torus average.
pub fn auxiliary_g(q: &VectorField, phi: &ScalarField, t: f64) -> Result<VectorField> {
    let grid = *q.grid();
    grid.check_same(phi.grid())?;
    let mass = mass_of(t)?;
    if mass == 0.0 {
        return Ok(VectorField::zeros(grid));
    }
    let grad = discrete_gradient(phi);
    let mean = q.mean();
    let rhs: Vec<Vec<f64>> = (0..grid.dim())
        .map(|i| {
            q.component(i)
                .iter()
                .zip(grad.component(i))
                .map(|(qi, gi)| (qi - mean[i] - gi) * mass)
                .collect()
        })
        .collect();
    let sp = Spectral::for_grid(&grid);
    let sym = sp.resolvent_symbol(mass);
    let refs: Vec<&[f64]> = rhs.iter().map(|v| v.as_slice()).collect();
    Ok(VectorField::from_raw(grid, sp.filter_many(&refs, &sym)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectorResiduals {
    /// True relative residual of the corrector solve.
    pub corrector: f64,
    /// Max-norm of `q_T - a_hT e - div sigma_T - g_T`.
    pub helmholtz: f64,
    /// Consistency bound the Helmholtz residual was checked against.
    pub helmholtz_bound: f64,
}

/// `(phi_T, q_T, sigma_T, g_T, a_hT e)` for one realization, cutoff and
/// direction.
#[derive(Debug, Clone)]
pub struct ExtendedCorrector {
    pub t: f64,
    pub direction: usize,
    pub phi: ScalarField,
    pub flux: VectorField,
    pub sigma: SkewField,
    pub g: VectorField,
    pub a_ht_column: Vec<f64>,
    pub residuals: CorrectorResiduals,
    pub report: SolveReport,
}

/// Max-norm of the defect in `q = <q> + div sigma + g`.
pub fn helmholtz_residual(q: &VectorField, sigma: &SkewField, g: &VectorField) -> f64 {
    let mean = q.mean();
    let div = skew_divergence(sigma);
    (0..q.grid().dim())
        .flat_map(|i| {
            let m = mean[i];
            q.component(i)
                .iter()
                .zip(div.component(i))
                .zip(g.component(i))
                .map(move |((qi, di), gi)| (qi - m - di - gi).abs())
        })
        .fold(0.0, f64::max)
}

pub fn assemble_extended_corrector(
    a: &CoefficientField,
    t: f64,
    direction: usize,
    cfg: &SolverConfig,
) -> Result<ExtendedCorrector> {
    let c = modified_corrector(a, t, direction, cfg)?;
    extend(a, c)
}

/// Adds `sigma_T`, `g_T` and `a_hT e` to a solved corrector and checks the
/// Helmholtz identity.
pub fn extend(a: &CoefficientField, c: Corrector) -> Result<ExtendedCorrector> {
    let sigma = vector_potential(&c.flux, c.t)?;
    let g = auxiliary_g(&c.flux, &c.phi, c.t)?;
    let helmholtz = helmholtz_residual(&c.flux, &sigma, &g);

    // The identity defect equals -(1/T - Delta)^{-1} grad r with r the
    // corrector residual; that operator has norm <= sqrt(T)/2.
    let rhs = corrector_rhs(a, c.direction);
    let abs_res = c.report.relative_residual * rhs.norm2();
    let gain = if c.t.is_finite() {
        0.5 * c.t.sqrt()
    } else {
        0.5 * a.grid().side() as f64
    };
    let bound = 10.0 * (gain * abs_res) + 1e-10 * (1.0 + c.flux.max_abs());
    if helmholtz > bound {
        return Err(Error::Consistency(format!(
            "Helmholtz identity residual {helmholtz:.3e} exceeds {bound:.3e}"
        )));
    }
    let a_ht_column = c.flux.mean();
    Ok(ExtendedCorrector {
        t: c.t,
        direction: c.direction,
        phi: c.phi,
        flux: c.flux,
        sigma,
        g,
        a_ht_column,
        residuals: CorrectorResiduals {
            corrector: c.report.relative_residual,
            helmholtz,
            helmholtz_bound: bound,
        },
        report: c.report,
    })
}

/// Column `i` is the torus mean of `q_{T i}`.
pub fn homogenized_coefficient_a_ht(fluxes: &[&VectorField]) -> Result<DMatrix<f64>> {
    let d = fluxes
        .first()
        .ok_or_else(|| Error::param("need one flux per direction"))?
        .grid()
        .dim();
    if fluxes.len() != d {
        return Err(Error::param(format!(
            "need {d} fluxes, one per direction, got {}",
            fluxes.len()
        )));
    }
    let mut m = DMatrix::zeros(d, d);
    for (i, q) in fluxes.iter().enumerate() {
        for (j, v) in q.mean().into_iter().enumerate() {
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

/// Torus average of `(grad phi_j + e_j) . a (grad phi_i + e_i)`.
pub fn quadratic_form(a: &CoefficientField, phis: &[&ScalarField]) -> DMatrix<f64> {
    let grid = *a.grid();
    let d = grid.dim();
    let grads: Vec<VectorField> = phis.iter().map(|p| discrete_gradient(p)).collect();
    let n = grid.sites() as f64;
    let mut m = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let mut s = 0.0;
            for l in 0..d {
                let (di, dj) = ((i == l) as u8 as f64, (j == l) as u8 as f64);
                s += a
                    .axis(l)
                    .iter()
                    .zip(grads[i].component(l))
                    .zip(grads[j].component(l))
                    .map(|((c, gi), gj)| c * (gi + di) * (gj + dj))
                    .sum::<f64>();
            }
            m[(j, i)] = s / n;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample, EnsembleSpec};
    use crate::lattice::TorusGrid;
    use std::f64::consts::PI;

    fn tight() -> SolverConfig {
        SolverConfig::with_tolerance(1e-11)
    }

    #[test]
    fn constant_medium_has_no_corrector() {
        let g = TorusGrid::new(2, 8).unwrap();
        let a = CoefficientField::constant(g, 0.6).unwrap();
        let c = assemble_extended_corrector(&a, 16.0, 1, &tight()).unwrap();
        assert_eq!(c.phi.max_abs(), 0.0);
        assert!(c.flux.component(1).iter().all(|&v| v == 0.6));
        assert_eq!(c.sigma.max_abs(), 0.0);
        assert!(c.g.max_abs() < 1e-14);
        assert!(c.residuals.helmholtz < 1e-14);
        assert_eq!(c.a_ht_column[0], 0.0);
        assert!((c.a_ht_column[1] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn corrector_equation_and_energy_identity() {
        let g = TorusGrid::new(2, 16).unwrap();
        let a = sample(&EnsembleSpec::default(), &g, 3, 1).unwrap();
        let t = 20.0;
        let c = modified_corrector(&a, t, 0, &tight()).unwrap();
        // (1/T) phi = div q
        let div = discrete_divergence(&c.flux);
        let r = c.phi.scaled(1.0 / t).axpy(-1.0, &div);
        assert!(r.norm2() <= 1e-10 * corrector_rhs(&a, 0).norm2());
        // (1/T) sum phi^2 + sum grad phi . a (grad phi + e) = 0
        let grad = discrete_gradient(&c.phi);
        let energy = c.phi.dot(&c.phi) / t + grad.dot(&c.flux);
        assert!(energy.abs() < 1e-9, "{energy}");
    }

    #[test]
    fn helmholtz_identity_and_ellipticity_on_random_medium() {
        let g = TorusGrid::new(2, 16).unwrap();
        let a = sample(&EnsembleSpec::default(), &g, 9, 4).unwrap();
        let cs: Vec<ExtendedCorrector> = (0..2)
            .map(|i| assemble_extended_corrector(&a, 64.0, i, &SolverConfig::default()).unwrap())
            .collect();
        for c in &cs {
            assert!(c.residuals.helmholtz <= 1e-7, "{:?}", c.residuals);
        }
        let aht =
            homogenized_coefficient_a_ht(&[&cs[0].flux, &cs[1].flux]).unwrap();
        for k in 0..100 {
            let th = 2.0 * PI * k as f64 / 100.0 + 0.1;
            let xi = nalgebra::DVector::from_vec(vec![th.cos() * 1.3, th.sin() * 0.7]);
            let form = xi.dot(&(&aht * &xi));
            assert!(form >= a.lambda() * xi.norm_squared() - 1e-12);
            assert!(form >= (&aht * &xi).norm_squared() - 1e-12);
        }
    }

    #[test]
    fn three_dimensional_smoke() {
        let g = TorusGrid::new(3, 8).unwrap();
        let a = sample(&EnsembleSpec::uniform(0.25), &g, 1, 0).unwrap();
        for i in 0..3 {
            let c = assemble_extended_corrector(&a, 16.0, i, &SolverConfig::default()).unwrap();
            assert!(c.residuals.helmholtz <= 1e-7);
        }
    }

    #[test]
    fn vector_potential_of_constant_and_of_rotated_gradient() {
        let g = TorusGrid::new(2, 16).unwrap();
        let q = VectorField::constant(g, &[0.3, -1.0]);
        assert_eq!(vector_potential(&q, 5.0).unwrap().max_abs(), 0.0);

        // q = (D_1 h, -D_0 h) for a Fourier mode h gives
        // curl = D_0 q_1 - D_1 q_0 = -(D_0 D_0 + D_1 D_1) h.
        let k = [2.0, 3.0];
        let h = ScalarField::from_fn(g, |c| (2.0 * PI * (k[0] * c[0] as f64 + k[1] * c[1] as f64) / 16.0).cos());
        let dh = discrete_gradient(&h);
        let q = VectorField::from_components(
            g,
            vec![dh.component(1).to_vec(), dh.component(0).iter().map(|v| -v).collect()],
        )
        .unwrap();
        let t = 4.0;
        let sigma = vector_potential(&q, t).unwrap();
        let d = |k: f64| ((2.0 * PI * k / 16.0).cos() - 1.0, (2.0 * PI * k / 16.0).sin());
        // D_j D_j h has symbol (e^{i t} - 1)^2 = (c-1)^2 - s^2 + 2 i s (c-1).
        let expect = ScalarField::from_fn(g, |c| {
            let phase = 2.0 * PI * (k[0] * c[0] as f64 + k[1] * c[1] as f64) / 16.0;
            let lap: f64 = k.iter().map(|&ki| 4.0 * (PI * ki / 16.0).sin().powi(2)).sum();
            let mut re = 0.0;
            let mut im = 0.0;
            for &ki in &k {
                let (a, b) = d(ki);
                re += a * a - b * b;
                im += 2.0 * a * b;
            }
            // -(sum_j D_j^2) h / (1/T + lap) with h = Re exp(i phase)
            -(re * phase.cos() - im * phase.sin()) / (1.0 / t + lap)
        });
        let got = ScalarField::from_values(g, sigma.components()[0].clone()).unwrap();
        assert!(got.axpy(-1.0, &expect).max_abs() < 1e-12);
    }

    #[test]
    fn auxiliary_field_vanishes_for_constant_medium_and_solves_its_equation() {
        let g = TorusGrid::new(2, 8).unwrap();
        let a = CoefficientField::constant(g, 0.4).unwrap();
        let c = modified_corrector(&a, 8.0, 0, &tight()).unwrap();
        assert!(auxiliary_g(&c.flux, &c.phi, 8.0).unwrap().max_abs() < 1e-14);

        let a = sample(&EnsembleSpec::default(), &g, 1, 5).unwrap();
        let t = 8.0;
        let c = modified_corrector(&a, t, 0, &tight()).unwrap();
        let gt = auxiliary_g(&c.flux, &c.phi, t).unwrap();
        let grad = discrete_gradient(&c.phi);
        let mean = c.flux.mean();
        for i in 0..2 {
            let gi = gt.component_field(i);
            let lhs = gi.axpy(-t, &crate::lattice::discrete_laplacian(&gi));
            for x in 0..g.sites() {
                let rhs = c.flux.component(i)[x] - mean[i] - grad.component(i)[x];
                assert!((lhs.values()[x] - rhs).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn quadratic_form_differs_from_flux_mean_by_mass_term() {
        let g = TorusGrid::new(2, 16).unwrap();
        let a = sample(&EnsembleSpec::default(), &g, 2, 2).unwrap();
        let t = 12.0;
        let cs: Vec<Corrector> = (0..2).map(|i| modified_corrector(&a, t, i, &tight()).unwrap()).collect();
        let form = quadratic_form(&a, &[&cs[0].phi, &cs[1].phi]);
        let aht = homogenized_coefficient_a_ht(&[&cs[0].flux, &cs[1].flux]).unwrap();
        let n = g.sites() as f64;
        for i in 0..2 {
            for j in 0..2 {
                let mass = cs[j].phi.dot(&cs[i].phi) / (t * n);
                assert!((form[(j, i)] - (aht[(j, i)] - mass)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn laminate_recovers_harmonic_mean() {
        // Stripes perpendicular to e_0: conductance depends on x_0 only.
        let g = TorusGrid::new(2, 16).unwrap();
        let (c1, c2) = (0.25, 1.0);
        let plane: Vec<f64> = (0..g.sites())
            .map(|x| if g.coords(x)[0] % 2 == 0 { c1 } else { c2 })
            .collect();
        let a = CoefficientField::from_conductances(g, vec![plane.clone(), plane], c1).unwrap();
        let harmonic = 2.0 * c1 * c2 / (c1 + c2);
        let arithmetic = 0.5 * (c1 + c2);
        let mut prev = f64::INFINITY;
        for t in [16.0, 64.0, 256.0, 1024.0] {
            let c0 = modified_corrector(&a, t, 0, &tight()).unwrap();
            let c1_ = modified_corrector(&a, t, 1, &tight()).unwrap();
            let m = homogenized_coefficient_a_ht(&[&c0.flux, &c1_.flux]).unwrap();
            let err = (m[(0, 0)] - harmonic).abs();
            assert!(err <= prev);
            assert!(err <= 2.0 / t, "T={t} err={err}");
            prev = err;
            assert!((m[(1, 1)] - arithmetic).abs() < 1e-12);
        }
    }

    #[test]
    fn wrong_direction_count_is_rejected() {
        let g = TorusGrid::new(2, 8).unwrap();
        let q = VectorField::zeros(g);
        assert!(homogenized_coefficient_a_ht(&[&q]).is_err());
        assert!(homogenized_coefficient_a_ht(&[]).is_err());
    }
}
