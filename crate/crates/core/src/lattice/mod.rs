//! Periodic lattice geometry and discrete calculus.
//!
//! Sites are stored row-major with the last axis fastest. A vector field keeps
//! one plane per axis; component `i` at site `x` lives on the edge from `x` to
//! `x + e_i`. Gradients are forward differences and divergences are backward
//! differences, so `div = -grad^T` holds exactly.

mod calculus;
mod field;
mod grid;
pub mod io;
mod mollify;
mod spectral;

pub use calculus::{
    apply_elliptic, curl_rhs, discrete_divergence, discrete_gradient, discrete_laplacian,
    skew_divergence,
};
pub use field::{ScalarField, SkewField, VectorField};
pub use grid::{TorusGrid, MAX_DIM};
pub use mollify::{gaussian_mollify, gaussian_mollify_vector, gaussian_symbol, mollified_at_origin};
pub use spectral::{fft_poisson_solve, Spectral};

pub(crate) use spectral::check_mean_free;
