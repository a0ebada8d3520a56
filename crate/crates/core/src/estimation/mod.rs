//! Plug-in estimation from observed samples, monotonicity-free bounds and
//! bootstrap intervals.

mod bootstrap;
mod bounds;
mod estimate;

pub use bootstrap::{bootstrap, BootstrapCI, Resampler, Statistic};
pub use bounds::{
    gamma, lower_bound_tightness_certificate, magnitude_lower_bound, sign_under_dominance,
    TightnessCertificate,
};
pub use estimate::{dichotomize, estimate, Estimates};

pub(crate) use bootstrap::std_dev;
