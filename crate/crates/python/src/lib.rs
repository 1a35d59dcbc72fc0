//! Python bindings: lattices, coefficient ensembles, extended correctors,
//! semigroups and the experiment runner.

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use homlab::cli::RunConfig;
use homlab::elliptic::{
    assemble_extended_corrector, minimal_radius, solve_massive_elliptic, ExtendedCorrector,
    SolverConfig, DEFAULT_DELTA,
};
use homlab::ensembles::{self, CoefficientField, EnsembleKind, EnsembleSpec};
use homlab::experiments::{self, ExperimentName, ExperimentSpec, RunOptions};
use homlab::lattice::{self, discrete_gradient, ScalarField, TorusGrid, VectorField};
use homlab::parabolic::evolve_semigroup;

fn py_err(e: homlab::Error) -> PyErr {
    match e {
        homlab::Error::Parameter(_) | homlab::Error::Config(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn scalar(grid: TorusGrid, values: Vec<f64>) -> PyResult<ScalarField> {
    ScalarField::from_values(grid, values).map_err(py_err)
}

fn cutoff(t: f64) -> PyResult<f64> {
    if t > 0.0 {
        Ok(t)
    } else {
        Err(PyValueError::new_err(format!("cutoff must be positive or inf, got {t}")))
    }
}

/// Periodic lattice `Z^d / L Z^d` with `L` a power of two.
#[pyclass(name = "Grid", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyGrid(TorusGrid);

#[pymethods]
impl PyGrid {
    #[new]
    fn new(dim: usize, side: usize) -> PyResult<Self> {
        TorusGrid::new(dim, side).map(Self).map_err(py_err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn side(&self) -> usize {
        self.0.side()
    }

    #[getter]
    fn sites(&self) -> usize {
        self.0.sites()
    }

    /// Integer coordinates of a flat site index.
    fn coords(&self, site: usize) -> PyResult<Vec<usize>> {
        if site >= self.0.sites() {
            return Err(PyValueError::new_err(format!("site {site} out of range")));
        }
        Ok(self.0.coords(site)[..self.0.dim()].to_vec())
    }

    fn __repr__(&self) -> String {
        format!("Grid(dim={}, side={})", self.0.dim(), self.0.side())
    }
}

/// Edge-conductance field with values in `[lambda, 1]`.
#[pyclass(name = "Coefficients", frozen, skip_from_py_object)]
struct PyCoefficients(CoefficientField);

#[pymethods]
impl PyCoefficients {
    /// Builds a field from one conductance plane per axis.
    #[new]
    #[pyo3(signature = (grid, planes, lam))]
    fn new(grid: &PyGrid, planes: Vec<Vec<f64>>, lam: f64) -> PyResult<Self> {
        CoefficientField::from_conductances(grid.0, planes, lam).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn constant(grid: &PyGrid, value: f64) -> PyResult<Self> {
        CoefficientField::constant(grid.0, value).map(Self).map_err(py_err)
    }

    #[getter]
    fn grid(&self) -> PyGrid {
        PyGrid(*self.0.grid())
    }

    #[getter]
    fn lam(&self) -> f64 {
        self.0.lambda()
    }

    #[getter]
    fn planes(&self) -> Vec<Vec<f64>> {
        self.0.planes().to_vec()
    }

    fn mean_per_axis(&self) -> Vec<f64> {
        self.0.mean_per_axis()
    }
}

/// Stationary random coefficient ensemble.
#[pyclass(name = "Ensemble", frozen, skip_from_py_object)]
struct PyEnsemble(EnsembleSpec);

#[pymethods]
impl PyEnsemble {
    #[new]
    #[pyo3(signature = (kind = "bernoulli", lam = ensembles::DEFAULT_LAMBDA, p = ensembles::DEFAULT_P, block_size = None))]
    fn new(kind: &str, lam: f64, p: f64, block_size: Option<usize>) -> PyResult<Self> {
        let kind = match kind.to_ascii_lowercase().as_str() {
            "bernoulli" => EnsembleKind::Bernoulli,
            "uniform" => EnsembleKind::Uniform,
            "block" => EnsembleKind::Block,
            other => return Err(PyValueError::new_err(format!("unknown ensemble {other:?}"))),
        };
        Ok(Self(EnsembleSpec { kind, lambda: lam, p, block_size }))
    }

    #[getter]
    fn range(&self) -> usize {
        self.0.range()
    }

    /// Realization `index` under `seed`; a pure function of the arguments.
    #[pyo3(signature = (grid, seed, index = 0))]
    fn sample(&self, grid: &PyGrid, seed: u64, index: u64) -> PyResult<PyCoefficients> {
        ensembles::sample(&self.0, &grid.0, seed, index).map(PyCoefficients).map_err(py_err)
    }
}

/// Massive corrector `phi_T` with its flux, vector potential and defect.
#[pyclass(name = "Corrector", frozen, skip_from_py_object)]
struct PyCorrector(ExtendedCorrector);

#[pymethods]
impl PyCorrector {
    #[getter]
    fn t(&self) -> f64 {
        self.0.t
    }

    #[getter]
    fn direction(&self) -> usize {
        self.0.direction
    }

    #[getter]
    fn phi(&self) -> Vec<f64> {
        self.0.phi.values().to_vec()
    }

    #[getter]
    fn flux(&self) -> Vec<Vec<f64>> {
        self.0.flux.components().to_vec()
    }

    /// Independent entries `sigma_jk`, `j < k`, in lexicographic order.
    #[getter]
    fn sigma(&self) -> Vec<Vec<f64>> {
        self.0.sigma.components().to_vec()
    }

    #[getter]
    fn g(&self) -> Vec<Vec<f64>> {
        self.0.g.components().to_vec()
    }

    #[getter]
    fn a_ht_column(&self) -> Vec<f64> {
        self.0.a_ht_column.clone()
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.0.report.iterations
    }

    #[getter]
    fn corrector_residual(&self) -> f64 {
        self.0.residuals.corrector
    }

    #[getter]
    fn helmholtz_residual(&self) -> f64 {
        self.0.residuals.helmholtz
    }

    /// Smallest dyadic radius with small normalized oscillation, and
    /// whether the search hit its cap.
    #[pyo3(signature = (delta = DEFAULT_DELTA))]
    fn minimal_radius(&self, delta: f64) -> PyResult<(usize, bool)> {
        let r = minimal_radius(&self.0.phi, &self.0.sigma, delta).map_err(py_err)?;
        Ok((r.radius, r.capped))
    }
}

/// Solves the extended corrector problem in `direction` with cutoff `t`
/// (`float("inf")` for the periodic corrector).
#[pyfunction]
#[pyo3(signature = (a, t, direction = 0, tolerance = 1e-9))]
fn corrector(py: Python<'_>, a: &PyCoefficients, t: f64, direction: usize, tolerance: f64) -> PyResult<PyCorrector> {
    let t = cutoff(t)?;
    let cfg = SolverConfig::with_tolerance(tolerance);
    py.detach(|| assemble_extended_corrector(&a.0, t, direction, &cfg))
        .map(PyCorrector)
        .map_err(py_err)
}

/// The `d x d` matrix `a_hT`, one column per corrector direction.
#[pyfunction]
#[pyo3(signature = (a, t, tolerance = 1e-9))]
fn a_ht(py: Python<'_>, a: &PyCoefficients, t: f64, tolerance: f64) -> PyResult<Vec<Vec<f64>>> {
    let t = cutoff(t)?;
    let cfg = SolverConfig::with_tolerance(tolerance);
    let d = a.0.grid().dim();
    let columns = py
        .detach(|| {
            (0..d)
                .map(|i| assemble_extended_corrector(&a.0, t, i, &cfg).map(|c| c.a_ht_column))
                .collect::<homlab::Result<Vec<_>>>()
        })
        .map_err(py_err)?;
    Ok((0..d).map(|r| columns.iter().map(|c| c[r]).collect()).collect())
}

/// Solves `u / t - div(a grad u) = rhs`.
#[pyfunction]
#[pyo3(signature = (a, t, rhs, tolerance = 1e-9))]
fn solve_elliptic(py: Python<'_>, a: &PyCoefficients, t: f64, rhs: Vec<f64>, tolerance: f64) -> PyResult<Vec<f64>> {
    let t = cutoff(t)?;
    let rhs = scalar(*a.0.grid(), rhs)?;
    let cfg = SolverConfig::with_tolerance(tolerance);
    py.detach(|| solve_massive_elliptic(&a.0, t, &rhs, &cfg))
        .map(ScalarField::into_values)
        .map_err(py_err)
}

/// Constant-coefficient `mass u - Laplacian u = rhs` via FFT.
#[pyfunction]
fn fft_poisson(grid: &PyGrid, mass: f64, rhs: Vec<f64>) -> PyResult<Vec<f64>> {
    let rhs = scalar(grid.0, rhs)?;
    lattice::fft_poisson_solve(mass, &rhs).map(ScalarField::into_values).map_err(py_err)
}

#[pyfunction]
fn mollify(grid: &PyGrid, values: Vec<f64>, radius: f64) -> PyResult<Vec<f64>> {
    let f = scalar(grid.0, values)?;
    lattice::gaussian_mollify(&f, radius).map(ScalarField::into_values).map_err(py_err)
}

#[pyfunction]
fn gradient(grid: &PyGrid, values: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
    let f = scalar(grid.0, values)?;
    Ok(discrete_gradient(&f).into_components())
}

#[pyfunction]
fn divergence(grid: &PyGrid, components: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    let v = VectorField::from_components(grid.0, components).map_err(py_err)?;
    Ok(lattice::discrete_divergence(&v).into_values())
}

/// Semigroup started from `div(a e)`: returns the stored dyadic times and
/// the spatial mean of `|grad u|^2` at each of them.
#[pyfunction]
#[pyo3(signature = (a, t_max, direction = 0, steps_per_dyad = 8, tolerance = 1e-9))]
fn semigroup_decay(
    py: Python<'_>,
    a: &PyCoefficients,
    t_max: f64,
    direction: usize,
    steps_per_dyad: usize,
    tolerance: f64,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let cfg = SolverConfig::with_tolerance(tolerance);
    let traj = py
        .detach(|| evolve_semigroup(&a.0, direction, t_max, steps_per_dyad, &cfg))
        .map_err(py_err)?;
    let energy = traj
        .u
        .iter()
        .map(|u| {
            let g = discrete_gradient(u);
            g.norm2().powi(2) / u.grid().sites() as f64
        })
        .collect();
    Ok((traj.times.clone(), energy))
}

/// Names of the available experiments.
#[pyfunction]
fn experiment_names() -> Vec<&'static str> {
    ExperimentName::ALL.iter().map(|n| n.as_str()).collect()
}

fn outcome(py: Python<'_>, spec: ExperimentSpec, opts: RunOptions) -> PyResult<(bool, String, String)> {
    let out = py.detach(|| experiments::run_experiment(&spec, &opts)).map_err(py_err)?;
    let json = serde_json::to_string(&out.report).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok((out.report.passed, json, out.run_dir.display().to_string()))
}

/// Runs the preset of experiment `name` and returns
/// `(passed, report_json, run_dir)`.
#[pyfunction]
#[pyo3(signature = (name, dim, side, output_dir, samples = None, master_seed = None, workers = 1, resume = false))]
#[allow(clippy::too_many_arguments)]
fn run_preset(
    py: Python<'_>,
    name: &str,
    dim: usize,
    side: usize,
    output_dir: PathBuf,
    samples: Option<usize>,
    master_seed: Option<u64>,
    workers: usize,
    resume: bool,
) -> PyResult<(bool, String, String)> {
    let mut spec = ExperimentSpec::preset(ExperimentName::parse(name).map_err(py_err)?, dim, side);
    if let Some(n) = samples {
        spec.samples = n;
    }
    if let Some(s) = master_seed {
        spec.master_seed = s;
    }
    outcome(py, spec, RunOptions { workers, output_dir, resume })
}

/// Runs the experiment described by a TOML config file, with optional
/// `section.key=value` overrides.
#[pyfunction]
#[pyo3(signature = (path, overrides = Vec::new(), resume = false))]
fn run_config(py: Python<'_>, path: PathBuf, overrides: Vec<String>, resume: bool) -> PyResult<(bool, String, String)> {
    let cfg = RunConfig::load(&path, &overrides).map_err(py_err)?;
    let opts = RunOptions { workers: cfg.workers, output_dir: cfg.output_dir, resume };
    outcome(py, cfg.experiment, opts)
}

#[pymodule]
fn pyhomlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyCoefficients>()?;
    m.add_class::<PyEnsemble>()?;
    m.add_class::<PyCorrector>()?;
    m.add_function(wrap_pyfunction!(corrector, m)?)?;
    m.add_function(wrap_pyfunction!(a_ht, m)?)?;
    m.add_function(wrap_pyfunction!(solve_elliptic, m)?)?;
    m.add_function(wrap_pyfunction!(fft_poisson, m)?)?;
    m.add_function(wrap_pyfunction!(mollify, m)?)?;
    m.add_function(wrap_pyfunction!(gradient, m)?)?;
    m.add_function(wrap_pyfunction!(divergence, m)?)?;
    m.add_function(wrap_pyfunction!(semigroup_decay, m)?)?;
    m.add_function(wrap_pyfunction!(experiment_names, m)?)?;
    m.add_function(wrap_pyfunction!(run_preset, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    Ok(())
}
