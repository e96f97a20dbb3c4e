//! Path simulation and Monte Carlo estimators.

pub mod estimate;
pub mod hybrid;
pub mod martingale;
pub mod rng;
pub mod ssa;

pub use estimate::{empirical_transform, pairwise_sum, Estimate};
pub use hybrid::{simulate_hybrid, simulate_hybrid_paths, HybridModel, HybridSegment, HybridTrajectory, ZBounds, ZJumpLaw};
pub use martingale::{martingale_check, MartingaleReport};
pub use ssa::{sample_at, sample_at_times, simulate_ssa, CompiledModel, Trajectory};

use crate::transforms::TransformError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimulateError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid start state: {0}")]
    InvalidStart(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Transform(#[from] TransformError),
}
