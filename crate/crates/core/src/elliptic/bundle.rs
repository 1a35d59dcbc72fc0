//! On-disk form of an extended corrector: one lattice file per field plus a
//! JSON manifest.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CorrectorResiduals, ExtendedCorrector, SolveReport};
use crate::ensembles::{CoefficientField, EnsembleSpec};
use crate::lattice::io::{read_planes, write_field};
use crate::lattice::{ScalarField, SkewField, TorusGrid, VectorField};
use crate::{Error, Result};

pub const MANIFEST: &str = "manifest.json";
pub const PHI: &str = "phi_T.hlf";
pub const FLUX: &str = "q_T.hlf";
pub const SIGMA: &str = "sigma_T.hlf";
pub const AUX: &str = "g_T.hlf";
pub const COEFFICIENTS: &str = "coefficients.hlf";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub dim: usize,
    pub side: usize,
    /// `null` encodes `T = inf`.
    pub t: Option<f64>,
    pub direction: usize,
    pub residuals: CorrectorResiduals,
    pub iterations: usize,
    pub a_ht_column: Vec<f64>,
    pub seed: u64,
    pub sample_index: u64,
    pub ensemble: EnsembleSpec,
    pub ensemble_hash: String,
    pub files: Vec<String>,
}

pub fn write_bundle(
    dir: &Path,
    c: &ExtendedCorrector,
    a: &CoefficientField,
    ensemble: &EnsembleSpec,
    seed: u64,
    sample_index: u64,
) -> Result<Manifest> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let grid = *c.phi.grid();
    write_field(&dir.join(PHI), &c.phi)?;
    write_field(&dir.join(FLUX), &c.flux)?;
    write_field(&dir.join(SIGMA), &c.sigma)?;
    write_field(&dir.join(AUX), &c.g)?;
    write_field(&dir.join(COEFFICIENTS), &a.as_vector_field())?;
    let manifest = Manifest {
        dim: grid.dim(),
        side: grid.side(),
        t: c.t.is_finite().then_some(c.t),
        direction: c.direction,
        residuals: c.residuals,
        iterations: c.report.iterations,
        a_ht_column: c.a_ht_column.clone(),
        seed,
        sample_index,
        ensemble: ensemble.clone(),
        ensemble_hash: ensemble.hash(),
        files: [PHI, FLUX, SIGMA, AUX, COEFFICIENTS]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    };
    let path = dir.join(MANIFEST);
    let text = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

/// Reads a bundle back. The solver history is not stored, so the report
/// carries only the iteration count and final residual.
pub fn read_bundle(dir: &Path) -> Result<(Manifest, ExtendedCorrector, CoefficientField)> {
    let path = dir.join(MANIFEST);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let m: Manifest = serde_json::from_str(&text)?;
    let grid = TorusGrid::new(m.dim, m.side)?;
    let load = |name: &str, count: usize| -> Result<Vec<Vec<f64>>> {
        let (g, planes) = read_planes(&dir.join(name))?;
        if g != grid || planes.len() != count {
            return Err(Error::Format(format!(
                "{name}: expected {count} planes on {grid}, found {} on {g}",
                planes.len()
            )));
        }
        Ok(planes)
    };
    let mut phi = load(PHI, 1)?;
    let phi = ScalarField::from_values(grid, phi.pop().unwrap())?;
    let flux = VectorField::from_components(grid, load(FLUX, grid.dim())?)?;
    let sigma = SkewField::from_components(grid, load(SIGMA, grid.skew_components())?)?;
    let g = VectorField::from_components(grid, load(AUX, grid.dim())?)?;
    let a = CoefficientField::from_conductances(
        grid,
        load(COEFFICIENTS, grid.dim())?,
        m.ensemble.lambda,
    )?;
    let c = ExtendedCorrector {
        t: m.t.unwrap_or(f64::INFINITY),
        direction: m.direction,
        phi,
        flux,
        sigma,
        g,
        a_ht_column: m.a_ht_column.clone(),
        residuals: m.residuals,
        report: SolveReport {
            iterations: m.iterations,
            relative_residual: m.residuals.corrector,
            residual_history: Vec::new(),
        },
    };
    Ok((m, c, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::{assemble_extended_corrector, SolverConfig};
    use crate::ensembles::sample;

    #[test]
    fn roundtrip_preserves_every_field() {
        let grid = TorusGrid::new(2, 8).unwrap();
        let spec = EnsembleSpec::default();
        let a = sample(&spec, &grid, 5, 2).unwrap();
        let c = assemble_extended_corrector(&a, 8.0, 1, &SolverConfig::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let m = write_bundle(dir.path(), &c, &a, &spec, 5, 2).unwrap();
        assert_eq!(m.ensemble_hash.len(), 64);
        let (m2, c2, a2) = read_bundle(dir.path()).unwrap();
        assert_eq!(m, m2);
        assert_eq!(c.phi, c2.phi);
        assert_eq!(c.flux, c2.flux);
        assert_eq!(c.sigma, c2.sigma);
        assert_eq!(c.g, c2.g);
        assert_eq!(a.planes(), a2.planes());
    }

    #[test]
    fn mismatched_file_is_rejected() {
        let grid = TorusGrid::new(2, 8).unwrap();
        let spec = EnsembleSpec::default();
        let a = sample(&spec, &grid, 5, 2).unwrap();
        let c = assemble_extended_corrector(&a, 8.0, 0, &SolverConfig::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_bundle(dir.path(), &c, &a, &spec, 5, 2).unwrap();
        write_field(&dir.path().join(PHI), &c.flux).unwrap();
        assert!(matches!(read_bundle(dir.path()), Err(Error::Format(_))));
    }
}
