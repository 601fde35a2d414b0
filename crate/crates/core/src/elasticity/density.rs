use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::{ElasticTensor, MixedGrowth};
use crate::scalar::Real;

/// Frobenius distance from `F` to `SO(3)`.
///
/// For `det F < 0` the smallest singular value is reflected.
pub fn dist_so3<T: Real>(f: &Matrix3<T>) -> T {
    let mut sigma = f.singular_values();
    // nalgebra does not sort singular values; order them descending.
    let s = sigma.as_mut_slice();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let one = T::one();
    let last = if f.determinant() >= T::zero() { s[2] - one } else { s[2] + one };
    ((s[0] - one) * (s[0] - one) + (s[1] - one) * (s[1] - one) + last * last).sqrt()
}

/// `Φ_p(dist(F, SO(3)))`.
pub fn density_finite<T: Real>(f: &Matrix3<T>, mg: &MixedGrowth<T>) -> T {
    mg.phi(dist_so3(f))
}

/// `Φ_p(|F + F^T|)`.
pub fn density_linear<T: Real>(f: &Matrix3<T>, mg: &MixedGrowth<T>) -> T {
    mg.phi((f + f.transpose()).norm())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kinematics {
    Finite,
    Linear,
}

impl Kinematics {
    /// Energy density `W(F)`.
    pub fn density<T: Real>(&self, f: &Matrix3<T>, mg: &MixedGrowth<T>) -> T {
        match self {
            Kinematics::Finite => density_finite(f, mg),
            Kinematics::Linear => density_linear(f, mg),
        }
    }

    /// `D²W` at the reference state (`Id` for finite, `0` for linear kinematics).
    pub fn linearized_tensor<T: Real>(&self) -> ElasticTensor<T> {
        let mu = match self {
            Kinematics::Finite => T::one(),
            Kinematics::Linear => T::lit(4.0),
        };
        ElasticTensor::isotropic(T::zero(), mu).expect("isotropic tensor with positive shear modulus")
    }

    /// Reference strain of the undeformed state.
    pub fn reference<T: Real>(&self) -> Matrix3<T> {
        match self {
            Kinematics::Finite => Matrix3::identity(),
            Kinematics::Linear => Matrix3::zeros(),
        }
    }
}
