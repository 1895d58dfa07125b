//! Model manifolds, step ladders, and speed estimates shared by every other
//! module.

pub mod estimate;
pub mod ladder;
pub mod manifold;
pub mod speed;

pub use estimate::{EstimateMethod, NormEstimate};
pub use ladder::{extrapolate, Extrapolated, StepLadder};
pub use manifold::{wrap_centered, wrap_unit, AmbientPoint, ModelManifold, TangentVector};
pub use speed::{speed_estimate, Sides};
