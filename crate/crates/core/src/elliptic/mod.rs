//! Massive correctors and the objects derived from them.

pub mod bundle;
mod corrector;
mod radius;
mod richardson;
mod solver;

pub use corrector::{
    assemble_extended_corrector, auxiliary_g, corrector_rhs, extend, helmholtz_residual,
    homogenized_coefficient_a_ht, modified_corrector, modified_corrector_with_guess,
    quadratic_form, unit_vector, vector_potential, Corrector, CorrectorResiduals,
    ExtendedCorrector,
};
pub use radius::{
    ball_oscillation, dyadic_radii, minimal_radius, minimal_radius_at, MinimalRadius,
    DEFAULT_DELTA,
};
pub use richardson::{
    a_ht_kappa, resolvent_g_kappa, richardson_correctors, richardson_extrapolate, Extrapolate,
    RichardsonCorrectors,
};
pub use solver::{
    mass_of, solve_massive_elliptic, solve_massive_elliptic_report, MassiveSolver,
    Preconditioner, SolveReport, SolverConfig,
};
