//! Dense-matrix oracles and identity checks shared by the integration tests
//! and the acceptance harness.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

use homlab::elliptic::{
    assemble_extended_corrector, modified_corrector, quadratic_form, resolvent_g_kappa, solve_massive_elliptic,
    unit_vector, vector_potential, SolverConfig,
};
use homlab::ensembles::{sample, CoefficientField, CounterRng, EnsembleSpec, Stream};
use homlab::lattice::{
    curl_rhs, discrete_divergence, discrete_gradient, fft_poisson_solve, gaussian_mollify, ScalarField, TorusGrid,
    VectorField,
};
use homlab::parabolic::{evolve_semigroup, evolve_semigroup_with, propagate_s, propagate_s_hom, Stepper, TimeGrid};

pub fn tight() -> SolverConfig {
    SolverConfig::with_tolerance(1e-13)
}

pub fn grid(d: usize, l: usize) -> TorusGrid {
    TorusGrid::new(d, l).unwrap()
}

pub fn medium(g: &TorusGrid, index: u64) -> CoefficientField {
    sample(&EnsembleSpec::default(), g, 11, index).unwrap()
}

pub fn noise(g: &TorusGrid, seed: u64) -> Vec<f64> {
    let mut r = CounterRng::new(seed, 0, Stream::Synthetic);
    (0..g.sites()).map(|_| r.next_gaussian()).collect()
}

pub fn noise_field(g: &TorusGrid, seed: u64) -> ScalarField {
    ScalarField::from_values(*g, noise(g, seed)).unwrap()
}

pub fn noise_flux(g: &TorusGrid, seed: u64) -> VectorField {
    let comps = (0..g.dim()).map(|i| noise(g, seed * 31 + i as u64)).collect();
    VectorField::from_components(*g, comps).unwrap()
}

fn rel(a: &[f64], b: &[f64]) -> f64 {
    let num = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let den = b.iter().map(|y| y * y).sum::<f64>().sqrt().max(1e-300);
    num / den
}

fn flat(f: &VectorField) -> Vec<f64> {
    f.components().concat()
}

/// Forward differences, rows `i * N + x` for the edge `x -> x + e_i`.
pub fn gradient_matrix(g: &TorusGrid) -> DMatrix<f64> {
    let n = g.sites();
    let d = g.dim();
    let mut m = DMatrix::zeros(d * n, n);
    for i in 0..d {
        let mut shift = vec![0i64; d];
        shift[i] = 1;
        for x in 0..n {
            m[(i * n + x, x)] -= 1.0;
            m[(i * n + x, g.offset(x, &shift))] += 1.0;
        }
    }
    m
}

fn conductance_diagonal(a: &CoefficientField) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_vec(a.planes().concat()))
}

/// `mass I - div a grad` as a dense matrix.
pub fn operator_matrix(a: &CoefficientField, mass: f64) -> DMatrix<f64> {
    let g = gradient_matrix(a.grid());
    let n = a.grid().sites();
    g.transpose() * conductance_diagonal(a) * &g + DMatrix::identity(n, n) * mass
}

/// Dense solve; with `mass = 0` the mean-free solution.
pub fn dense_solve(op: &DMatrix<f64>, rhs: &[f64], mass: f64) -> Vec<f64> {
    let n = rhs.len();
    let m = if mass == 0.0 {
        op + DMatrix::from_element(n, n, 1.0 / n as f64)
    } else {
        op.clone()
    };
    m.lu().solve(&DVector::from_column_slice(rhs)).unwrap().as_slice().to_vec()
}

/// Worst relative deviation between every solver on the torus and its dense
/// counterpart, on `L = 4, 8` in two dimensions and `L = 4` in three.
pub fn dense_oracle_error() -> f64 {
    let mut worst: f64 = 0.0;
    let cases = [(2, 4), (2, 8), (3, 4)];
    for (k, &(d, l)) in cases.iter().enumerate() {
        let g = grid(d, l);
        let a = medium(&g, k as u64);
        let n = g.sites();
        let gm = gradient_matrix(&g);

        // Gradient and divergence.
        let u = noise_field(&g, 5 + k as u64);
        let grad: Vec<f64> = (&gm * DVector::from_column_slice(u.values())).as_slice().to_vec();
        worst = worst.max(rel(&flat(&discrete_gradient(&u)), &grad));
        let f = noise_flux(&g, 7 + k as u64);
        let div: Vec<f64> = (-gm.transpose() * DVector::from_vec(flat(&f))).as_slice().to_vec();
        worst = worst.max(rel(discrete_divergence(&f).values(), &div));

        // Massive and massless elliptic solves.
        for t in [4.0, f64::INFINITY] {
            let mass = if t.is_finite() { 1.0 / t } else { 0.0 };
            let op = operator_matrix(&a, mass);
            let mut rhs = noise(&g, 9 + k as u64);
            if mass == 0.0 {
                let m = rhs.iter().sum::<f64>() / n as f64;
                rhs.iter_mut().for_each(|v| *v -= m);
            }
            let rhs_f = ScalarField::from_values(g, rhs.clone()).unwrap();
            let x = solve_massive_elliptic(&a, t, &rhs_f, &tight()).unwrap();
            worst = worst.max(rel(x.values(), &dense_solve(&op, &rhs, mass)));

            for dir in 0..d {
                let c = modified_corrector(&a, t, dir, &tight()).unwrap();
                let e: Vec<f64> = (0..d * n).map(|r| if r / n == dir { 1.0 } else { 0.0 }).collect();
                let ae = conductance_diagonal(&a) * DVector::from_vec(e);
                let rhs: Vec<f64> = (-gm.transpose() * ae).as_slice().to_vec();
                worst = worst.max(rel(c.phi.values(), &dense_solve(&op, &rhs, mass)));

                // Vector potential against a dense Laplacian solve.
                let sigma = vector_potential(&c.flux, t).unwrap();
                let lap = &gm.transpose() * &gm + DMatrix::identity(n, n) * mass;
                for (p, (j, kk)) in homlab::lattice::SkewField::pairs(d).into_iter().enumerate() {
                    let r = curl_rhs(&c.flux, j, kk);
                    worst = worst.max(rel(&sigma.components()[p], &dense_solve(&lap, r.values(), mass)));
                }
            }
        }

        // Constant-coefficient Poisson.
        let lap = &gm.transpose() * &gm + DMatrix::identity(n, n) * 0.3;
        let rhs = noise(&g, 13 + k as u64);
        let p = fft_poisson_solve(0.3, &ScalarField::from_values(g, rhs.clone()).unwrap()).unwrap();
        worst = worst.max(rel(p.values(), &dense_solve(&lap, &rhs, 0.3)));

        // One Crank-Nicolson step, states and flux.
        let q0 = noise_flux(&g, 17 + k as u64);
        let mut s = Stepper::new(&a, q0.clone(), 0.0, TimeGrid::new(4).unwrap(), &tight()).unwrap();
        let dt = s.step().unwrap();
        let op = operator_matrix(&a, 0.0);
        let id = DMatrix::<f64>::identity(n, n);
        let v0 = DVector::from_column_slice(discrete_divergence(&q0).values());
        let cn = (&id + &op * (dt / 2.0)).lu().solve(&((&id - &op * (dt / 2.0)) * &v0)).unwrap();
        worst = worst.max(rel(s.v().values(), cn.as_slice()));
        let psi = (&v0 + &cn) * (dt / 2.0);
        let flux = DVector::from_vec(flat(&q0)) + conductance_diagonal(&a) * &gm * psi;
        worst = worst.max(rel(&flat(s.flux()), flux.as_slice()));

        // Constant-coefficient propagator against the dense matrix exponential.
        let mut ah = DMatrix::identity(d, d) * 0.5;
        ah[(0, 0)] = 0.6;
        ah[(0, 1)] = 0.1;
        ah[(1, 0)] = 0.1;
        let blocks = DMatrix::from_fn(d * n, d * n, |r, c| if r % n == c % n { ah[(r / n, c / n)] } else { 0.0 });
        let op_h = gm.transpose() * &blocks * &gm;
        let eig = op_h.clone().symmetric_eigen();
        for span in [1.5, f64::INFINITY] {
            let fvals = eig.eigenvalues.map(|lam| {
                if lam.abs() < 1e-12 {
                    0.0
                } else if span.is_infinite() {
                    1.0 / lam
                } else {
                    (1.0 - (-span * lam).exp()) / lam
                }
            });
            let fm = &eig.eigenvectors * DMatrix::from_diagonal(&fvals) * eig.eigenvectors.transpose();
            let want = DVector::from_vec(flat(&q0)) + &blocks * &gm * (fm * &v0);
            let got = propagate_s_hom(&ah, &q0, 0.5, 0.5 + span).unwrap();
            worst = worst.max(rel(&flat(&got), want.as_slice()));
        }
    }
    worst
}

/// `|sum grad u . F + sum u div F|` relative to `|grad u| |F|`.
pub fn summation_by_parts_error() -> f64 {
    let mut worst: f64 = 0.0;
    for (d, l, seed) in [(2, 32, 1u64), (3, 8, 2)] {
        let g = grid(d, l);
        let u = noise_field(&g, seed);
        let f = noise_flux(&g, seed + 100);
        let gu = discrete_gradient(&u);
        let lhs = gu.dot(&f);
        let rhs = -u.dot(&discrete_divergence(&f));
        worst = worst.max((lhs - rhs).abs() / (gu.norm2() * f.norm2()));
    }
    worst
}

/// Largest Helmholtz residual `|q - a_hT e - div sigma - g|` over a few
/// realizations, cutoffs and both directions at `L = 32`.
pub fn helmholtz_residual() -> f64 {
    let g = grid(2, 32);
    let mut worst: f64 = 0.0;
    for index in 0..3 {
        let a = medium(&g, index);
        for t in [16.0, 256.0, f64::INFINITY] {
            for dir in 0..2 {
                let c = assemble_extended_corrector(&a, t, dir, &SolverConfig::default()).unwrap();
                worst = worst.max(c.residuals.helmholtz);
            }
        }
    }
    worst
}

/// `(min, max)` of `xi . a_hT xi / |xi|^2` over 100 random directions.
pub fn ellipticity_range() -> (f64, f64, f64) {
    let g = grid(2, 32);
    let a = medium(&g, 4);
    let phis: Vec<ScalarField> = (0..2)
        .map(|i| modified_corrector(&a, 64.0, i, &tight()).unwrap().phi)
        .collect();
    let m = quadratic_form(&a, &phis.iter().collect::<Vec<_>>());
    let mut r = CounterRng::new(3, 0, Stream::Synthetic);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for _ in 0..100 {
        let xi = nalgebra::Vector2::new(r.next_gaussian(), r.next_gaussian());
        let v = (xi.transpose() * &m * xi)[(0, 0)] / xi.norm_squared();
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi, a.lambda())
}

/// `S_{1 -> 16}` against `S_{4 -> 16} S_{1 -> 4}`, and `q(T)` against
/// `S_{t -> T} q(t)` along a trajectory.
pub fn semigroup_errors() -> (f64, f64) {
    let g = grid(2, 16);
    let a = medium(&g, 2);
    let q0 = noise_flux(&g, 21);
    let direct = propagate_s(&a, &q0, 1.0, 16.0, 8, &tight()).unwrap();
    let mid = propagate_s(&a, &q0, 1.0, 4.0, 8, &tight()).unwrap();
    let composed = propagate_s(&a, &mid, 4.0, 16.0, 8, &tight()).unwrap();
    let semigroup = composed.axpy(-1.0, &direct).max_abs() / direct.max_abs();

    let tr = evolve_semigroup(&a, 0, 16.0, 8, &tight()).unwrap();
    let mut flux: f64 = 0.0;
    for i in 0..tr.times.len() {
        for j in i + 1..tr.times.len() {
            let s = propagate_s(&a, &tr.q[i], tr.times[i], tr.times[j], 8, &tight()).unwrap();
            flux = flux.max(s.axpy(-1.0, &tr.q[j]).max_abs() / tr.q[j].max_abs());
        }
    }
    (semigroup, flux)
}

/// `F_3 F_4 f` against `F_5 f`.
pub fn mollifier_semigroup_error() -> f64 {
    let g = grid(2, 64);
    let f = noise_field(&g, 8);
    let a = gaussian_mollify(&gaussian_mollify(&f, 3.0).unwrap(), 4.0).unwrap();
    let b = gaussian_mollify(&f, 5.0).unwrap();
    a.axpy(-1.0, &b).max_abs() / b.max_abs()
}

/// Relative errors of `int e^{-t/T} u dt` against `phi_T` and of
/// `int (dt/T) e^{-t/T} q dt` against `q_T`, by the trapezoid rule on the
/// time steps up to `16 T`.
pub fn yoshida_errors(side: usize, t: f64, steps_per_dyad: usize) -> (f64, f64) {
    let g = grid(2, side);
    let a = medium(&g, 6);
    let n = g.sites();
    let d = g.dim();
    let mut phi = vec![0.0; n];
    let mut q = vec![vec![0.0; n]; d];
    let mut prev_t = 0.0;
    let mut prev_u = discrete_divergence(&a.flux_of_constant(&unit_vector(d, 0))).into_values();
    let mut prev_q = a.flux_of_constant(&unit_vector(d, 0)).into_components();
    evolve_semigroup_with(&a, 0, 16.0 * t, steps_per_dyad, &tight(), |s| {
        let (t0, t1) = (prev_t, s.t());
        let (w0, w1) = ((-t0 / t).exp(), (-t1 / t).exp());
        let h = 0.5 * (t1 - t0);
        for (x, p) in phi.iter_mut().enumerate() {
            *p += h * (w0 * prev_u[x] + w1 * s.v().values()[x]);
        }
        for (i, qi) in q.iter_mut().enumerate() {
            let cur = s.flux().component(i);
            for (x, v) in qi.iter_mut().enumerate() {
                *v += h / t * (w0 * prev_q[i][x] + w1 * cur[x]);
            }
        }
        prev_t = t1;
        prev_u = s.v().values().to_vec();
        prev_q = s.flux().components().to_vec();
        Ok(())
    })
    .unwrap();
    let c = modified_corrector(&a, t, 0, &tight()).unwrap();
    (rel(&phi, c.phi.values()), rel(&q.concat(), &flat(&c.flux)))
}

/// Smallest `|g_k(mu, T) - 1/mu| mu (1/T + mu)^k T^k` over the grid
/// `mu in [1e-4, 1]`, `T in [1, 1e4]`, `k in {1, 2, 3}`; the inequality holds
/// with this constant.
pub fn g_kappa_constant() -> f64 {
    let mut c = f64::INFINITY;
    for kappa in 1..=3 {
        for i in 0..=40 {
            let mu = 10f64.powf(-4.0 + 4.0 * i as f64 / 40.0);
            for j in 0..=40 {
                let t = 10f64.powf(4.0 * j as f64 / 40.0);
                let g = resolvent_g_kappa(mu, t, kappa).unwrap();
                let bound = t.powi(-(kappa as i32)) / (mu * (1.0 / t + mu).powi(kappa as i32));
                c = c.min((g - 1.0 / mu).abs() / bound);
            }
        }
    }
    c
}
