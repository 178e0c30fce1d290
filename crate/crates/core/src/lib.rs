//! Almost goodness-of-fit (AGoF) testing.
//!
//! Decides, by bootstrap, whether the L^p distance between the distribution
//! generating a sample and its maximum-likelihood representative inside a
//! parametric family is below a margin `epsilon`, and reports the smallest
//! certifiable margin together with the improvement over a constant model.
//!
//! The crate is organized bottom-up:
//!
//! * [`distributions`]: families, sampling, MLE and EM fitting.
//! * [`quadrature`] and [`metric`]: L^p distances between cdfs.
//! * [`bootstrap`]: replicate norms and their summaries.
//! * [`decision`]: the AGoF decision, minimum margin, improvement coefficient.
//! * [`input`]: reading samples from files.
//! * [`harness`]: Monte Carlo power and size studies.
//! * [`cli`]: the `agof` command-line front end.

// `!(x > 0.0)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bootstrap;
pub mod cli;
pub mod decision;
pub mod distributions;
pub mod error;
pub mod harness;
pub mod input;
pub mod metric;
pub mod quadrature;
pub mod rng;

pub use bootstrap::{run_bootstrap, BootstrapConfig, BootstrapSummary, FailurePolicy};
pub use distributions::{
    em_fit_mixture, fit_mle, log_likelihood, projection_params, EmConfig, FamilyId, FittedModel, Params, Sample,
};
pub use error::{AgofError, Result};
pub use harness::{power_curve, size_calibration, PowerCurve, PowerStudyConfig};
pub use metric::{analytic_distance, dirac_distance, empirical_model_distance, DistanceConfig, DistanceResult};
pub use decision::{agof_test, dual_test, improvement_coefficient, min_margin, Method, TestConfig, TestReport};

/// Version string echoed in reports.
pub const ENGINE_VERSION: &str = concat!("agof ", env!("CARGO_PKG_VERSION"));
