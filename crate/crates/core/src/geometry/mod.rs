//! Frames, rotations, cylinders, boxes, and field transformations.

mod transform;
mod transversal;

pub use transform::{
    discrete_curl, transform_current, transform_field, FnField, GridField, Interpolation, MatrixField,
    TransformParams, TransformedField,
};
pub use transversal::{transversal, TransversalityReport, Violation, ViolationKind};

use std::ops::Mul;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A proper rotation `Q ∈ SO(3)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation<T: Real = f64>(Matrix3<T>);

impl<T: Real> Rotation<T> {
    fn tolerance() -> T {
        let eps = T::default_epsilon() * T::lit(1000.0);
        if eps > T::lit(1e-10) {
            eps
        } else {
            T::lit(1e-10)
        }
    }

    /// Validates orthogonality and orientation.
    pub fn new(m: Matrix3<T>) -> Result<Self> {
        let residual = (m * m.transpose() - Matrix3::identity()).amax();
        let det = m.determinant();
        if residual > Self::tolerance() || det <= T::zero() {
            return Err(Error::NotARotation(format!(
                "orthogonality residual {:e}, det {}",
                residual.as_f64(),
                det.as_f64()
            )));
        }
        Ok(Self(m))
    }

    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    /// Right-handed rotation by `angle` about `axis` (need not be normalized).
    pub fn from_axis_angle(axis: &Vector3<T>, angle: T) -> Self {
        let n = axis.normalize();
        let k = n.cross_matrix();
        let m = Matrix3::identity() + k * angle.sin() + k * k * (T::one() - angle.cos());
        Self(m)
    }

    /// Rotation by `phi` about `e3`.
    pub fn about_z(phi: T) -> Self {
        Self::from_axis_angle(&Vector3::z(), phi)
    }

    #[inline]
    pub fn matrix(&self) -> &Matrix3<T> {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn apply(&self, v: &Vector3<T>) -> Vector3<T> {
        self.0 * v
    }
}

impl<T: Real> Mul for Rotation<T> {
    type Output = Rotation<T>;
    fn mul(self, rhs: Self) -> Self {
        Rotation(self.0 * rhs.0)
    }
}

/// The rotation `Q_t` with `Q_t e3 = t`: Rodrigues rotation about `e3 × t`;
/// identity for `t = e3`, rotation by π about `e1` for `t = -e3`.
pub fn rotation_to<T: Real>(t: &Vector3<T>) -> Result<Rotation<T>> {
    let tol = Rotation::<T>::tolerance();
    if (t.norm() - T::one()).abs() > tol {
        return Err(Error::InvalidArgument(format!("direction must be a unit vector (|t| = {})", t.norm().as_f64())));
    }
    let cos = t[2];
    let axis = Vector3::new(-t[1], t[0], T::zero());
    let sin = axis.norm();
    if sin <= T::default_epsilon() * T::lit(16.0) {
        if cos > T::zero() {
            return Ok(Rotation::identity());
        }
        let mut m = Matrix3::identity();
        m[(1, 1)] = -T::one();
        m[(2, 2)] = -T::one();
        return Ok(Rotation(m));
    }
    let k = (axis / sin).cross_matrix();
    // Rodrigues with sin/cos taken from t directly.
    let m = Matrix3::identity() + k * sin + k * k * (T::one() - cos);
    Ok(Rotation(m))
}

/// Orthonormal cylindrical frame `(e_r, e_θ, e_z)` at angle `theta`.
pub fn frame<T: Real>(theta: T) -> (Vector3<T>, Vector3<T>, Vector3<T>) {
    let (s, c) = theta.sin_cos();
    (
        Vector3::new(c, s, T::zero()),
        Vector3::new(-s, c, T::zero()),
        Vector3::z(),
    )
}

/// `Φ_t(r, θ, z) = Q_t (r cos θ, r sin θ, z)`.
pub fn phi_t<T: Real>(r: T, theta: T, z: T, t: &Vector3<T>) -> Result<Vector3<T>> {
    if !(r > T::zero()) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {}", r.as_f64())));
    }
    let q = rotation_to(t)?;
    let (s, c) = theta.sin_cos();
    Ok(q.apply(&Vector3::new(r * c, r * s, z)))
}

/// Hollow cylinder `Q_t ((B'_R \ B'_r) × (0, h)) + base`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HollowCylinder {
    pub inner: f64,
    pub outer: f64,
    pub height: f64,
    pub axis: [f64; 3],
    #[serde(default)]
    pub base: [f64; 3],
}

impl HollowCylinder {
    /// Checks `0 <= r < R <= h` (the last inequality is dropped when `relaxed`).
    pub fn new(inner: f64, outer: f64, height: f64, axis: Vector3<f64>, relaxed: bool) -> Result<Self> {
        let ok = inner >= 0.0 && inner < outer && height > 0.0 && (relaxed || outer <= height);
        if !ok {
            return Err(Error::Geometry(format!(
                "need 0 <= r < R <= h, got r={inner}, R={outer}, h={height}"
            )));
        }
        rotation_to(&axis)?;
        Ok(Self {
            inner,
            outer,
            height,
            axis: axis.into(),
            base: [0.0; 3],
        })
    }

    pub fn volume(&self) -> f64 {
        std::f64::consts::PI * (self.outer * self.outer - self.inner * self.inner) * self.height
    }

    pub fn contains(&self, x: &Vector3<f64>) -> bool {
        let t = Vector3::from(self.axis);
        let d = x - Vector3::from(self.base);
        let z = d.dot(&t);
        let r = (d - t * z).norm();
        z > 0.0 && z < self.height && r > self.inner && r < self.outer
    }
}

/// Axis-aligned box `[min, max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl AxisBox {
    pub fn new(min: [f64; 3], max: [f64; 3]) -> Result<Self> {
        if (0..3).any(|d| !(max[d] > min[d])) {
            return Err(Error::Geometry(format!("degenerate box {min:?}..{max:?}")));
        }
        Ok(Self { min, max })
    }

    pub fn cube(side: f64) -> Self {
        Self {
            min: [0.0; 3],
            max: [side; 3],
        }
    }

    pub fn contains_open(&self, x: &Vector3<f64>, tol: f64) -> bool {
        (0..3).all(|d| x[d] > self.min[d] + tol && x[d] < self.max[d] - tol)
    }

    pub fn on_boundary(&self, x: &Vector3<f64>, tol: f64) -> bool {
        let inside_closed = (0..3).all(|d| x[d] >= self.min[d] - tol && x[d] <= self.max[d] + tol);
        inside_closed && !self.contains_open(x, tol)
    }

    pub fn as_oriented(&self) -> OrientedBox {
        let c = Vector3::from_fn(|d, _| 0.5 * (self.min[d] + self.max[d]));
        let h = Vector3::from_fn(|d, _| 0.5 * (self.max[d] - self.min[d]));
        OrientedBox {
            center: c,
            axes: Matrix3::identity(),
            half_widths: h,
        }
    }
}

/// Box with center, orthonormal axes (columns) and half widths.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrientedBox {
    pub center: Vector3<f64>,
    pub axes: Matrix3<f64>,
    pub half_widths: Vector3<f64>,
}

impl OrientedBox {
    /// Parameter range `[s0, s1] ⊂ [0, 1]` of `a + s (b - a)` inside the box, if any.
    pub fn clip_segment(&self, a: &Vector3<f64>, b: &Vector3<f64>) -> Option<(f64, f64)> {
        let la = self.axes.transpose() * (a - self.center);
        let lb = self.axes.transpose() * (b - self.center);
        clip_to_slabs(&la, &lb, &(-self.half_widths), &self.half_widths)
    }
}

/// Liang-Barsky clipping of `a + s (b - a)`, `s ∈ [0, 1]`, to `lo <= x <= hi`.
pub(crate) fn clip_to_slabs(
    a: &Vector3<f64>,
    b: &Vector3<f64>,
    lo: &Vector3<f64>,
    hi: &Vector3<f64>,
) -> Option<(f64, f64)> {
    let d = b - a;
    let (mut s0, mut s1) = (0.0f64, 1.0f64);
    for k in 0..3 {
        if d[k].abs() < 1e-300 {
            if a[k] < lo[k] || a[k] > hi[k] {
                return None;
            }
            continue;
        }
        let mut ta = (lo[k] - a[k]) / d[k];
        let mut tb = (hi[k] - a[k]) / d[k];
        if ta > tb {
            std::mem::swap(&mut ta, &mut tb);
        }
        s0 = s0.max(ta);
        s1 = s1.min(tb);
        if s0 > s1 {
            return None;
        }
    }
    Some((s0, s1))
}

/// Distance from `p` to the segment `[a, b]`.
pub fn point_segment_distance(p: &Vector3<f64>, a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    let d = b - a;
    let len2 = d.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let s = ((p - a).dot(&d) / len2).clamp(0.0, 1.0);
    (p - (a + d * s)).norm()
}

/// Exact distance between segments `[p0, p1]` and `[q0, q1]`.
pub fn segment_segment_distance(p0: &Vector3<f64>, p1: &Vector3<f64>, q0: &Vector3<f64>, q1: &Vector3<f64>) -> f64 {
    let d1 = p1 - p0;
    let d2 = q1 - q0;
    let r = p0 - q0;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);
    let (s, t);
    if a <= 1e-300 && e <= 1e-300 {
        return r.norm();
    }
    if a <= 1e-300 {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= 1e-300 {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s_ = if denom > 1e-14 * a * e {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut t_ = (b * s_ + f) / e;
            if t_ < 0.0 {
                t_ = 0.0;
                s_ = (-c / a).clamp(0.0, 1.0);
            } else if t_ > 1.0 {
                t_ = 1.0;
                s_ = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s_;
            t = t_;
        }
    }
    let c1 = p0 + d1 * s;
    let c2 = q0 + d2 * t;
    let dist = (c1 - c2).norm();
    // Parallel segments: the clamped closed form may miss the endpoint pairs.
    let ends = [
        point_segment_distance(p0, q0, q1),
        point_segment_distance(p1, q0, q1),
        point_segment_distance(q0, p0, p1),
        point_segment_distance(q1, p0, p1),
    ];
    ends.into_iter().fold(dist, f64::min)
}
