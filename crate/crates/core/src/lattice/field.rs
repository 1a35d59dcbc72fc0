use super::TorusGrid;
use crate::{Error, Result};

fn check_values(grid: &TorusGrid, values: &[f64], what: &str) -> Result<()> {
    if values.len() != grid.sites() {
        return Err(Error::param(format!(
            "{what}: expected {} values, got {}",
            grid.sites(),
            values.len()
        )));
    }
    if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::param(format!("{what}: non-finite value at site {pos}")));
    }
    Ok(())
}

/// One real value per site.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.sites()],
        }
    }

    pub fn from_values(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        check_values(&grid, &values, "scalar field")?;
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: TorusGrid, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut values = vec![0.0; grid.sites()];
        grid.for_each_site(|idx, c| values[idx] = f(c));
        Self { grid, values }
    }

    /// Internal constructor for outputs of finite arithmetic.
    pub(crate) fn from_raw(grid: TorusGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.sites());
        Self { grid, values }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn norm2(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &ScalarField) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|v| v * s).collect())
    }

    /// Linear combination `self + s * other`.
    pub fn axpy(&self, s: f64, other: &ScalarField) -> Self {
        Self::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + s * b)
                .collect(),
        )
    }
}

/// `d` reals per site; component `i` lives on the edge `x -> x + e_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: TorusGrid,
    components: Vec<Vec<f64>>,
}

impl VectorField {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            components: vec![vec![0.0; grid.sites()]; grid.dim()],
        }
    }

    /// Constant field equal to `v` on every site.
    pub fn constant(grid: TorusGrid, v: &[f64]) -> Self {
        Self {
            grid,
            components: (0..grid.dim()).map(|i| vec![v[i]; grid.sites()]).collect(),
        }
    }

    pub fn from_components(grid: TorusGrid, components: Vec<Vec<f64>>) -> Result<Self> {
        if components.len() != grid.dim() {
            return Err(Error::param(format!(
                "vector field: expected {} components, got {}",
                grid.dim(),
                components.len()
            )));
        }
        for c in &components {
            check_values(&grid, c, "vector field")?;
        }
        Ok(Self { grid, components })
    }

    pub(crate) fn from_raw(grid: TorusGrid, components: Vec<Vec<f64>>) -> Self {
        debug_assert_eq!(components.len(), grid.dim());
        Self { grid, components }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn component(&self, i: usize) -> &[f64] {
        &self.components[i]
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub fn into_components(self) -> Vec<Vec<f64>> {
        self.components
    }

    pub fn component_field(&self, i: usize) -> ScalarField {
        ScalarField::from_raw(self.grid, self.components[i].clone())
    }

    pub fn mean(&self) -> Vec<f64> {
        let n = self.grid.sites() as f64;
        self.components
            .iter()
            .map(|c| c.iter().sum::<f64>() / n)
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn norm2(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn dot(&self, other: &VectorField) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>())
            .sum()
    }

    pub fn axpy(&self, s: f64, other: &VectorField) -> Self {
        Self::from_raw(
            self.grid,
            self.components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + s * y).collect())
                .collect(),
        )
    }

    /// Subtracts a constant vector from every site.
    pub fn shifted(&self, v: &[f64]) -> Self {
        Self::from_raw(
            self.grid,
            self.components
                .iter()
                .enumerate()
                .map(|(i, c)| c.iter().map(|x| x - v[i]).collect())
                .collect(),
        )
    }
}

/// Skew tensor field stored by its `d(d-1)/2` upper-triangular components,
/// ordered `(0,1), (0,2), (1,2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewField {
    grid: TorusGrid,
    components: Vec<Vec<f64>>,
}

impl SkewField {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            components: vec![vec![0.0; grid.sites()]; grid.skew_components()],
        }
    }

    pub fn from_components(grid: TorusGrid, components: Vec<Vec<f64>>) -> Result<Self> {
        if components.len() != grid.skew_components() {
            return Err(Error::param(format!(
                "skew field: expected {} components, got {}",
                grid.skew_components(),
                components.len()
            )));
        }
        for c in &components {
            check_values(&grid, c, "skew field")?;
        }
        Ok(Self { grid, components })
    }

    pub(crate) fn from_raw(grid: TorusGrid, components: Vec<Vec<f64>>) -> Self {
        Self { grid, components }
    }

    /// Upper-triangular pairs in storage order.
    pub fn pairs(dim: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for j in 0..dim {
            for k in j + 1..dim {
                out.push((j, k));
            }
        }
        out
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    /// Value of `sigma_{jk}` at a site; zero on the diagonal.
    pub fn entry(&self, j: usize, k: usize, site: usize) -> f64 {
        if j == k {
            return 0.0;
        }
        let (a, b, sign) = if j < k { (j, k, 1.0) } else { (k, j, -1.0) };
        let pos = Self::pairs(self.grid.dim())
            .iter()
            .position(|&p| p == (a, b))
            .expect("pair in range");
        sign * self.components[pos][site]
    }

    pub fn max_abs(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_and_wrong_length() {
        let g = TorusGrid::new(2, 4).unwrap();
        assert!(ScalarField::from_values(g, vec![0.0; 15]).is_err());
        let mut v = vec![0.0; 16];
        v[3] = f64::NAN;
        assert!(ScalarField::from_values(g, v).is_err());
        assert!(VectorField::from_components(g, vec![vec![0.0; 16]]).is_err());
    }

    #[test]
    fn skew_entries_are_antisymmetric() {
        let g = TorusGrid::new(3, 4).unwrap();
        let comps = (0..3).map(|c| vec![c as f64 + 1.0; 64]).collect();
        let s = SkewField::from_components(g, comps).unwrap();
        for j in 0..3 {
            assert_eq!(s.entry(j, j, 5), 0.0);
            for k in 0..3 {
                assert_eq!(s.entry(j, k, 5), -s.entry(k, j, 5));
            }
        }
        assert_eq!(s.entry(1, 2, 0), 3.0);
    }
}
