//! Monte Carlo estimators with jackknife error bars.

mod clt;
mod covariance;
pub mod csv;
mod fit;
mod independence;
mod jackknife;
mod normality;

pub use clt::{clt_profile, CltProfile, MIN_CLT_SAMPLES};
pub use covariance::{covariance_q, CovarianceEstimate, MIN_COVARIANCE_SAMPLES};
pub use csv::{CsvBlock, CsvRow};
pub use fit::{linear_fit, rate_fit, RateFit, MIN_FIT_POINTS};
pub use independence::{
    correlation_check, independence_check, IndependenceCheck, TestFunction,
    MIN_INDEPENDENCE_SAMPLES,
};
pub use jackknife::{
    correlation, covariance_of, jackknife, mean_estimate, mean_of, variance_of, Estimate,
    JACKKNIFE_GROUPS,
};
pub use normality::{normality_report, NormalityReport, MIN_NORMALITY_SAMPLES};
