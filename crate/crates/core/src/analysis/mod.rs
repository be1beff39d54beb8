//! Error estimation, slope fitting, a priori bounds and experiment drivers.

pub mod bounds;
pub mod experiment;
pub mod mc;
pub mod slopes;

pub use bounds::{bound_certificate, check_bounds, check_holder, BoundCertificate, BoundReport, HolderReport};
pub use experiment::{compare_schemes, run_experiment, ExperimentConfig, ExperimentOutcome, SchemeComparison, SlopeFit};
pub use mc::{mc_error, ErrorRow, ErrorTable, McConfig, McOutcome, ReferenceSpec, SampleFailure};
pub use slopes::{fit_series, fit_slopes, Aggregate, PairwiseSlope, SlopeReport};
