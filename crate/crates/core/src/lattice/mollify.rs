use super::{ScalarField, Spectral, TorusGrid, VectorField};
use crate::{Error, Result};

/// Fourier multiplier of the periodised Gaussian of width `radius`:
/// `exp(-radius^2 |theta|^2 / 2)` with `theta` folded into the Brillouin zone.
pub fn gaussian_symbol(spectral: &Spectral, radius: f64) -> Vec<f64> {
    let angles = spectral.angles();
    let r2 = radius * radius;
    spectral.symbol_from_modes(|k| {
        let t2: f64 = k.iter().map(|&ki| angles[ki] * angles[ki]).sum();
        (-0.5 * r2 * t2).exp()
    })
}

fn check_radius(grid: &TorusGrid, radius: f64) -> Result<()> {
    let max = grid.side() as f64 / 8.0;
    if !(radius > 0.0 && radius <= max) {
        return Err(Error::param(format!(
            "mollifier radius must lie in (0, {max}], got {radius}"
        )));
    }
    Ok(())
}

/// Convolution with the Gaussian `(2 pi R^2)^{-d/2} exp(-|x|^2 / 2R^2)` on
/// the torus.
pub fn gaussian_mollify(field: &ScalarField, radius: f64) -> Result<ScalarField> {
    let grid = *field.grid();
    check_radius(&grid, radius)?;
    let sp = Spectral::for_grid(&grid);
    let sym = gaussian_symbol(&sp, radius);
    Ok(ScalarField::from_raw(grid, sp.filter(field.values(), &sym)))
}

pub fn gaussian_mollify_vector(field: &VectorField, radius: f64) -> Result<VectorField> {
    let grid = *field.grid();
    check_radius(&grid, radius)?;
    let sp = Spectral::for_grid(&grid);
    let sym = gaussian_symbol(&sp, radius);
    let refs: Vec<&[f64]> = field.components().iter().map(|c| c.as_slice()).collect();
    Ok(VectorField::from_raw(grid, sp.filter_many(&refs, &sym)))
}

/// `f_R(0)` for every radius in `radii`, from a single transform.
pub fn mollified_at_origin(grid: &TorusGrid, values: &[f64], radii: &[f64]) -> Result<Vec<f64>> {
    for &r in radii {
        check_radius(grid, r)?;
    }
    let sp = Spectral::for_grid(grid);
    let z = sp.forward_real(values);
    let n = grid.sites() as f64;
    Ok(radii
        .iter()
        .map(|&r| {
            let sym = gaussian_symbol(&sp, r);
            z.iter().zip(&sym).map(|(c, s)| c.re * s).sum::<f64>() / n
        })
        .collect())
}
