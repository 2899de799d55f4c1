//! Population-mean estimation under additive measurement error.
//!
//! - [`moments`]: population parameters and the second moments of the sample means.
//! - [`estimators`]: point evaluation of the mean, ratio, exponential-ratio,
//!   regression, Grover–Kaur and proposed dual-exponential estimators.
//! - [`theory`]: first-order bias/MSE with measurement-error decomposition,
//!   optimal weights and percent relative efficiency.
//! - [`montecarlo`]: seeded, thread-count independent simulation oracle.
//! - [`cli`]: parameter and data files, reports, and the `mestim` command.

pub mod cli;
pub mod error;
pub mod estimators;
pub mod montecarlo;
pub mod moments;
pub mod theory;

pub use error::{Error, Result};
pub use estimators::{EstimatorId, SampleSummary, WeightPair};
pub use moments::{derive_moments, DerivedMoments, PopulationParams};
pub use theory::{MseBreakdown, OptimalWeights, TpMode, WeightQuadratic};
