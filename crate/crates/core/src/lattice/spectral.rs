use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, LazyLock, Mutex};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{ScalarField, TorusGrid};
use crate::{Error, Result};

static CACHE: LazyLock<Mutex<HashMap<TorusGrid, Arc<Spectral>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

/// FFT plans and lattice symbols for one grid.
///
/// Forward transform convention: `F(k) = sum_x u(x) exp(-2 pi i k.x / L)`;
/// the inverse carries the `1/N` factor.
pub struct Spectral {
    grid: TorusGrid,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// `4 sin^2(pi k / L)` for `k = 0..L`.
    line_symbol: Vec<f64>,
    /// Wavenumber angle folded into `(-pi, pi]`.
    angles: Vec<f64>,
    laplacian: Vec<f64>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl Spectral {
    /// Shared instance for `grid`; plans are built once per process.
    pub fn for_grid(grid: &TorusGrid) -> Arc<Spectral> {
        let mut cache = CACHE.lock().expect("spectral cache poisoned");
        cache
            .entry(*grid)
            .or_insert_with(|| Arc::new(Spectral::build(*grid)))
            .clone()
    }

    fn build(grid: TorusGrid) -> Self {
        let l = grid.side();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(l);
        let inv = planner.plan_fft_inverse(l);
        let line_symbol: Vec<f64> = (0..l)
            .map(|k| {
                let s = (PI * k as f64 / l as f64).sin();
                4.0 * s * s
            })
            .collect();
        let angles = (0..l)
            .map(|k| 2.0 * PI * grid.centered(k) as f64 / l as f64)
            .collect();
        let mut laplacian = vec![0.0; grid.sites()];
        grid.for_each_site(|idx, c| laplacian[idx] = c.iter().map(|&k| line_symbol[k]).sum());
        Self {
            grid,
            fwd,
            inv,
            line_symbol,
            angles,
            laplacian,
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    /// Symbol of `-Delta`: `sum_i 4 sin^2(pi k_i / L)`.
    pub fn laplacian_symbol(&self) -> &[f64] {
        &self.laplacian
    }

    pub fn line_symbol(&self) -> &[f64] {
        &self.line_symbol
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// Evaluates `f` on the per-axis wavenumber indices of every mode.
    pub fn symbol_from_modes(&self, mut f: impl FnMut(&[usize]) -> f64) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.sites()];
        self.grid.for_each_site(|idx, k| out[idx] = f(k));
        out
    }

    fn transform(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let zero = Complex64::new(0.0, 0.0);
        let mut scratch = vec![zero; fft.get_inplace_scratch_len()];
        for axis in 0..self.grid.dim() {
            let (outer, n, inner) = self.grid.axis_layout(axis);
            if inner == 1 {
                fft.process_with_scratch(data, &mut scratch);
                continue;
            }
            let mut tmp = vec![zero; n * inner];
            for o in 0..outer {
                let block = &mut data[o * n * inner..(o + 1) * n * inner];
                for c in 0..n {
                    for t in 0..inner {
                        tmp[t * n + c] = block[c * inner + t];
                    }
                }
                fft.process_with_scratch(&mut tmp, &mut scratch);
                for c in 0..n {
                    for t in 0..inner {
                        block[c * inner + t] = tmp[t * n + c];
                    }
                }
            }
        }
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.fwd);
    }

    /// Inverse transform including the `1/N` normalisation.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inv);
        let s = 1.0 / self.grid.sites() as f64;
        for z in data.iter_mut() {
            *z *= s;
        }
    }

    pub fn forward_real(&self, u: &[f64]) -> Vec<Complex64> {
        let mut z: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut z);
        z
    }

    /// Multiplies two real fields by a real, even symbol (`s(k) = s(-k)`),
    /// sharing one complex transform.
    pub fn filter_pair(&self, u: &[f64], v: &[f64], symbol: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut z: Vec<Complex64> = u
            .iter()
            .zip(v)
            .map(|(&a, &b)| Complex64::new(a, b))
            .collect();
        self.forward(&mut z);
        for (c, s) in z.iter_mut().zip(symbol) {
            *c *= *s;
        }
        self.inverse(&mut z);
        z.iter().map(|c| (c.re, c.im)).unzip()
    }

    /// Multiplies a real field by a real, even symbol.
    pub fn filter(&self, u: &[f64], symbol: &[f64]) -> Vec<f64> {
        let mut z = self.forward_real(u);
        for (c, s) in z.iter_mut().zip(symbol) {
            *c *= *s;
        }
        self.inverse(&mut z);
        z.iter().map(|c| c.re).collect()
    }

    /// Filters any number of real fields, two per transform.
    pub fn filter_many(&self, fields: &[&[f64]], symbol: &[f64]) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(fields.len());
        for chunk in fields.chunks(2) {
            if chunk.len() == 2 {
                let (a, b) = self.filter_pair(chunk[0], chunk[1], symbol);
                out.push(a);
                out.push(b);
            } else {
                out.push(self.filter(chunk[0], symbol));
            }
        }
        out
    }

    /// Inverse of `mass - Delta` as a symbol; the zero mode is dropped when
    /// `mass == 0`.
    pub fn resolvent_symbol(&self, mass: f64) -> Vec<f64> {
        self.laplacian
            .iter()
            .map(|&l| {
                let m = mass + l;
                if m > 0.0 {
                    1.0 / m
                } else {
                    0.0
                }
            })
            .collect()
    }
}

/// Relative tolerance used to decide that a right-hand side is mean-free.
const MEAN_FREE_TOL: f64 = 1e-12;

pub(crate) fn check_mean_free(values: &[f64]) -> Result<()> {
    let scale = values.iter().map(|v| v.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
    let total: f64 = values.iter().sum();
    if total.abs() > MEAN_FREE_TOL * scale {
        return Err(Error::param(format!(
            "zero mass requires a mean-free right-hand side (relative mean {:.3e})",
            total.abs() / scale
        )));
    }
    Ok(())
}

/// Solves `(mass - Delta) u = rhs` exactly in Fourier space.
pub fn fft_poisson_solve(mass: f64, rhs: &ScalarField) -> Result<ScalarField> {
    if !(mass >= 0.0) || !mass.is_finite() {
        return Err(Error::param(format!("mass must be finite and >= 0, got {mass}")));
    }
    if mass == 0.0 {
        check_mean_free(rhs.values())?;
    }
    let spectral = Spectral::for_grid(rhs.grid());
    let symbol = spectral.resolvent_symbol(mass);
    Ok(ScalarField::from_raw(
        *rhs.grid(),
        spectral.filter(rhs.values(), &symbol),
    ))
}
