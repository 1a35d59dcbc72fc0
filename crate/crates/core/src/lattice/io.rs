//! Flat binary field format.
//!
//! ```text
//! offset  size  content
//! 0       4     magic "HLF1"
//! 4       4     d (u32 LE)
//! 8       4     L (u32 LE)
//! 12      4     component count c (u32 LE)
//! 16      8*c*L^d  f64 LE, component planes in order, each plane row-major
//!                  over sites (last axis fastest)
//! ```

use std::path::Path;

use super::{ScalarField, SkewField, TorusGrid, VectorField};
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"HLF1";
const HEADER_LEN: usize = 16;

/// Anything stored as a stack of site-indexed planes.
pub trait Planes {
    fn grid(&self) -> &TorusGrid;
    fn planes(&self) -> Vec<&[f64]>;
}

impl Planes for ScalarField {
    fn grid(&self) -> &TorusGrid {
        ScalarField::grid(self)
    }
    fn planes(&self) -> Vec<&[f64]> {
        vec![self.values()]
    }
}

impl Planes for VectorField {
    fn grid(&self) -> &TorusGrid {
        VectorField::grid(self)
    }
    fn planes(&self) -> Vec<&[f64]> {
        self.components().iter().map(|c| c.as_slice()).collect()
    }
}

impl Planes for SkewField {
    fn grid(&self) -> &TorusGrid {
        SkewField::grid(self)
    }
    fn planes(&self) -> Vec<&[f64]> {
        self.components().iter().map(|c| c.as_slice()).collect()
    }
}

pub fn encode(grid: &TorusGrid, planes: &[&[f64]]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * planes.len() * grid.sites());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.side() as u32).to_le_bytes());
    out.extend_from_slice(&(planes.len() as u32).to_le_bytes());
    for p in planes {
        debug_assert_eq!(p.len(), grid.sites());
        for v in p.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<(TorusGrid, Vec<Vec<f64>>)> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!("file too short ({} bytes)", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Format("bad magic, expected HLF1".into()));
    }
    let word = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let (d, l, c) = (word(4), word(8), word(12));
    let grid = TorusGrid::new(d, l).map_err(|e| Error::Format(e.to_string()))?;
    let expect = HEADER_LEN + 8 * c * grid.sites();
    if bytes.len() != expect {
        return Err(Error::Format(format!(
            "expected {expect} bytes for {c} components on {grid}, found {}",
            bytes.len()
        )));
    }
    let planes = bytes[HEADER_LEN..]
        .chunks_exact(8 * grid.sites())
        .map(|plane| {
            plane
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                .collect()
        })
        .collect();
    Ok((grid, planes))
}

pub fn write_field(path: &Path, field: &dyn Planes) -> Result<()> {
    let bytes = encode(field.grid(), &field.planes());
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_planes(path: &Path) -> Result<(TorusGrid, Vec<Vec<f64>>)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}
