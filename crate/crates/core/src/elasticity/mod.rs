//! Elasticity tensors, mixed-growth densities and their convex envelopes.

mod density;
mod growth;
mod tensor;

pub use density::{density_finite, density_linear, dist_so3, Kinematics};
pub use growth::{phi_p, split_small_large, MixedGrowth};
pub use tensor::{vec_index, ElasticTensor, TensorKind, TensorParameters, TensorSpec, ValidationReport};
