//! Heat kernels, curvature and entropic cutoff diagnostics for finite
//! continuous-time Markov chains.

pub mod chain;
pub mod curvature;
pub mod entropy;
pub mod error;
pub mod families;
pub mod spectral;
pub mod verdict;

pub use chain::{Chain, Distribution, MetricData, StochasticMatrix};
pub use error::{Error, Result};
pub use verdict::InequalityVerdict;
