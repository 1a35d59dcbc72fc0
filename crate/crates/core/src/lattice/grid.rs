use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const MAX_DIM: usize = 3;

/// Periodic lattice `(Z / L Z)^d` with unit spacing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusGrid {
    dim: usize,
    side: usize,
}

impl TorusGrid {
    /// `side` must be a power of two and at least 4; `dim` is 2 or 3.
    pub fn new(dim: usize, side: usize) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&dim) {
            return Err(Error::param(format!("dimension must be 2 or 3, got {dim}")));
        }
        if side < 4 || !side.is_power_of_two() {
            return Err(Error::param(format!(
                "side length must be a power of two >= 4, got {side}"
            )));
        }
        Ok(Self { dim, side })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn sites(&self) -> usize {
        self.side.pow(self.dim as u32)
    }

    pub fn edges(&self) -> usize {
        self.dim * self.sites()
    }

    /// Number of independent components of a skew tensor.
    pub fn skew_components(&self) -> usize {
        self.dim * (self.dim - 1) / 2
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.side.pow((self.dim - 1 - axis) as u32)
    }

    /// `(outer, side, inner)` view of the storage along `axis`.
    pub(crate) fn axis_layout(&self, axis: usize) -> (usize, usize, usize) {
        let inner = self.stride(axis);
        let outer = self.sites() / (self.side * inner);
        (outer, self.side, inner)
    }

    pub fn coords(&self, mut index: usize) -> [usize; MAX_DIM] {
        let mut c = [0; MAX_DIM];
        for axis in (0..self.dim).rev() {
            c[axis] = index % self.side;
            index /= self.side;
        }
        c
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords[..self.dim]
            .iter()
            .fold(0, |acc, &c| acc * self.side + c % self.side)
    }

    /// Index of `x + shift` with periodic wrap; shifts may be negative.
    pub fn offset(&self, index: usize, shift: &[i64]) -> usize {
        let c = self.coords(index);
        let l = self.side as i64;
        let mut out = [0usize; MAX_DIM];
        for axis in 0..self.dim {
            out[axis] = (c[axis] as i64 + shift[axis]).rem_euclid(l) as usize;
        }
        self.index(&out[..self.dim])
    }

    /// Signed periodic displacement of coordinate `c` from the origin.
    pub fn centered(&self, c: usize) -> i64 {
        let l = self.side as i64;
        let c = c as i64;
        if c > l / 2 {
            c - l
        } else {
            c
        }
    }

    /// Visits every site with its coordinates, in storage order.
    pub fn for_each_site(&self, mut f: impl FnMut(usize, &[usize])) {
        let mut c = [0usize; MAX_DIM];
        for idx in 0..self.sites() {
            f(idx, &c[..self.dim]);
            for axis in (0..self.dim).rev() {
                c[axis] += 1;
                if c[axis] < self.side {
                    break;
                }
                c[axis] = 0;
            }
        }
    }

    pub(crate) fn check_same(&self, other: &TorusGrid) -> Result<()> {
        if self != other {
            return Err(Error::param(format!(
                "grid mismatch: {}^{} vs {}^{}",
                self.side, self.dim, other.side, other.dim
            )));
        }
        Ok(())
    }
}

impl std::fmt::Display for TorusGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}^{}", self.side, self.dim)
    }
}
