//! Numerical laboratory for quantitative stochastic homogenization on a
//! periodic lattice.
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice`]: torus geometry, discrete calculus, spectral solves and
//!   Gaussian mollification.
//! * [`ensembles`]: seeded stationary random conductance fields.
//! * [`elliptic`]: massive correctors, vector potential, auxiliary field,
//!   homogenized coefficients, Richardson extrapolation and the minimal radius.
//! * [`parabolic`]: the semigroup, the propagators and the homogenization
//!   commutator.
//! * [`statistics`]: Monte Carlo estimators with jackknife error bars.
//! * [`experiments`]: named experiments, deterministic scheduling and reports.
//! * [`cli`]: the `homlab` command-line front end.

pub mod cli;
pub mod elliptic;
pub mod ensembles;
pub mod error;
pub mod experiments;
pub mod lattice;
pub mod parabolic;
pub mod statistics;

pub use error::{Error, Result};

/// Hex SHA-256 of the JSON encoding of `value`.
pub fn hash_json<T: serde::Serialize + ?Sized>(value: &T) -> String {
    use sha2::{Digest, Sha256};
    let bytes = serde_json::to_vec(value).expect("serializable");
    Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
