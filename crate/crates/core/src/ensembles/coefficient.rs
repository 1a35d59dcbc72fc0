use crate::lattice::{TorusGrid, VectorField};
use crate::{Error, Result};

/// One realization: a conductance in `[lambda, 1]` on every edge.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    grid: TorusGrid,
    conductances: Vec<Vec<f64>>,
    lambda: f64,
}

impl CoefficientField {
    pub fn from_conductances(
        grid: TorusGrid,
        conductances: Vec<Vec<f64>>,
        lambda: f64,
    ) -> Result<Self> {
        if conductances.len() != grid.dim() || conductances.iter().any(|p| p.len() != grid.sites())
        {
            return Err(Error::param("conductances must have one plane per axis"));
        }
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::param(format!("lambda must lie in (0, 1], got {lambda}")));
        }
        if let Some(v) = conductances
            .iter()
            .flatten()
            .find(|&&v| !(v >= lambda && v <= 1.0))
        {
            return Err(Error::param(format!(
                "conductance {v} outside [{lambda}, 1]"
            )));
        }
        Ok(Self {
            grid,
            conductances,
            lambda,
        })
    }

    pub fn constant(grid: TorusGrid, value: f64) -> Result<Self> {
        Self::from_conductances(grid, vec![vec![value; grid.sites()]; grid.dim()], value)
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn planes(&self) -> &[Vec<f64>] {
        &self.conductances
    }

    pub fn axis(&self, i: usize) -> &[f64] {
        &self.conductances[i]
    }

    pub fn mean_per_axis(&self) -> Vec<f64> {
        self.conductances
            .iter()
            .map(|p| p.iter().sum::<f64>() / p.len() as f64)
            .collect()
    }

    /// Edgewise product `a (grad + e)`; `shift` is added before multiplying.
    pub fn flux(&self, gradient: &VectorField, shift: &[f64]) -> VectorField {
        let comps = (0..self.grid.dim())
            .map(|i| {
                gradient
                    .component(i)
                    .iter()
                    .zip(&self.conductances[i])
                    .map(|(g, a)| a * (g + shift[i]))
                    .collect()
            })
            .collect();
        VectorField::from_components(self.grid, comps).expect("finite flux")
    }

    /// `a e` as an edge field.
    pub fn flux_of_constant(&self, e: &[f64]) -> VectorField {
        self.flux(&VectorField::zeros(self.grid), e)
    }

    pub fn as_vector_field(&self) -> VectorField {
        VectorField::from_components(self.grid, self.conductances.clone()).expect("finite")
    }
}
