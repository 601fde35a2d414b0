//! Anisotropic dislocation line tension, cell problems, periodic strain
//! fields and regularized elastic energies.
//!
//! Tensor, rotation and growth primitives are generic over [`Real`]; the
//! solvers work in `f64`.

pub mod cellproblem;
pub mod elasticity;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod limits;
pub mod linetension;
pub mod network;
pub mod quadrature;
pub mod relaxation;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type ElasticTensor64 = elasticity::ElasticTensor<f64>;
pub type ElasticTensor32 = elasticity::ElasticTensor<f32>;
pub type Rotation64 = geometry::Rotation<f64>;
pub type Rotation32 = geometry::Rotation<f32>;
pub type MixedGrowth64 = elasticity::MixedGrowth<f64>;
pub type MixedGrowth32 = elasticity::MixedGrowth<f32>;
