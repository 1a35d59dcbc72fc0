//! The parabolic semigroup, its flux propagators and the homogenization
//! commutator.

pub mod checkpoint;
mod commutator;
mod hom;
mod stepper;
mod time;
mod trajectory;

pub use commutator::{centering_matrix, commutator, CommutatorField};
pub use hom::{homogenization_error, propagate_s_hom};
pub use stepper::{propagate_s, StepRecord, Stepper};
pub use time::{check_dyadic, TimeGrid, MIN_STEPS_PER_DYAD};
pub use trajectory::{evolve_semigroup, evolve_semigroup_with, SemigroupTrajectory};

#[cfg(test)]
mod tests;
