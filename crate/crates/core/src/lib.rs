//! Frequentist posterior probabilities over discrete grids of candidate
//! proportions.
//!
//! Every candidate value on a [`ParameterGrid`] carries the same base-rate
//! prior, so normalising a binomial likelihood curve yields a posterior
//! distribution conditional only on the observed data. On top of that the
//! crate provides P-value comparison, Bayes-rule pooling of studies,
//! replication probabilities and a Monte Carlo engine that checks the
//! sampling-model identities empirically.

pub mod cli;
pub mod combine;
pub mod compare;
pub mod error;
pub mod figure;
pub mod grid;
pub mod likelihood;
pub mod posterior;
pub mod replication;
pub mod simulate;
pub mod special;
pub mod studies;

pub use combine::{multiply_normalize, pool_studies, what_if_update, StudyRecord};
pub use compare::{
    compare_gaussian_model, compare_p_and_posterior, exact_binomial_p_value, gaussian_p_value,
    ComparisonReport, Direction, GaussianComparison, SdConvention,
};
pub use error::{Error, Result};
pub use grid::{induced_pair, make_grid, Curve, CurveKind, Observation, ParameterGrid};
pub use likelihood::{
    binomial_pmf, gaussian_likelihood_curve, likelihood_curve, likelihood_sum, GaussianModel,
};
pub use posterior::{
    binomial_identity_divergence, normalize, range_probability, replication_interval, rescale_grid,
    scalar_bayes, tail_probability, two_hypothesis_posterior, RangeSpec,
};
pub use replication::{idealistic_replication, ir_index, realistic_bounds, ReplicationAssessment};
pub use simulate::{
    significance_boundary, simulate_calibration, simulate_threshold_instability, CalibrationReport,
    SimulationConfig,
};
