use nalgebra::{Matrix3, Vector3};

use super::Rotation;
use crate::error::{Error, Result};
use crate::network::PolyhedralCurrent;

/// A matrix-valued field that can be sampled at arbitrary points.
pub trait MatrixField {
    fn eval(&self, x: &Vector3<f64>) -> Result<Matrix3<f64>>;
}

/// Field given by a closure.
pub struct FnField<F>(pub F);

impl<F: Fn(&Vector3<f64>) -> Matrix3<f64>> MatrixField for FnField<F> {
    fn eval(&self, x: &Vector3<f64>) -> Result<Matrix3<f64>> {
        Ok((self.0)(x))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Interpolation {
    Nearest,
    Trilinear,
}

/// Samples on the nodes `origin + h * (i, j, k)`.
#[derive(Clone, Debug)]
pub struct GridField {
    pub origin: Vector3<f64>,
    pub spacing: f64,
    pub dims: [usize; 3],
    pub values: Vec<Matrix3<f64>>,
    pub periodic: bool,
    pub interpolation: Interpolation,
}

impl GridField {
    pub fn from_fn(
        origin: Vector3<f64>,
        spacing: f64,
        dims: [usize; 3],
        periodic: bool,
        interpolation: Interpolation,
        f: impl Fn(&Vector3<f64>) -> Matrix3<f64>,
    ) -> Self {
        let mut values = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    let x = origin + Vector3::new(i as f64, j as f64, k as f64) * spacing;
                    values.push(f(&x));
                }
            }
        }
        Self {
            origin,
            spacing,
            dims,
            values,
            periodic,
            interpolation,
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize, k: usize) -> &Matrix3<f64> {
        &self.values[(i * self.dims[1] + j) * self.dims[2] + k]
    }

    fn wrap(&self, idx: i64, d: usize) -> Option<usize> {
        let n = self.dims[d] as i64;
        if self.periodic {
            Some(idx.rem_euclid(n) as usize)
        } else if idx >= 0 && idx < n {
            Some(idx as usize)
        } else {
            None
        }
    }
}

impl MatrixField for GridField {
    fn eval(&self, x: &Vector3<f64>) -> Result<Matrix3<f64>> {
        let u = (x - self.origin) / self.spacing;
        let outside = || Error::OutsideDomain([x[0], x[1], x[2]]);
        if !self.periodic {
            for d in 0..3 {
                let upper = (self.dims[d] - 1) as f64;
                if u[d] < -1e-9 || u[d] > upper + 1e-9 {
                    return Err(outside());
                }
            }
        }
        match self.interpolation {
            Interpolation::Nearest => {
                let idx: Vec<usize> = (0..3)
                    .map(|d| self.wrap(u[d].round() as i64, d).ok_or_else(outside))
                    .collect::<Result<_>>()?;
                Ok(*self.at(idx[0], idx[1], idx[2]))
            }
            Interpolation::Trilinear => {
                let mut base = [0i64; 3];
                let mut frac = [0.0; 3];
                for d in 0..3 {
                    let mut fl = u[d].floor();
                    if !self.periodic && fl as usize >= self.dims[d] - 1 {
                        fl = (self.dims[d] - 2) as f64;
                    }
                    base[d] = fl as i64;
                    frac[d] = u[d] - fl;
                }
                let mut acc = Matrix3::zeros();
                for corner in 0..8 {
                    let mut w = 1.0;
                    let mut idx = [0usize; 3];
                    for d in 0..3 {
                        let bit = (corner >> d) & 1;
                        w *= if bit == 1 { frac[d] } else { 1.0 - frac[d] };
                        idx[d] = self.wrap(base[d] + bit as i64, d).ok_or_else(outside)?;
                    }
                    if w != 0.0 {
                        acc += self.at(idx[0], idx[1], idx[2]) * w;
                    }
                }
                Ok(acc)
            }
        }
    }
}

/// Parameters of `x ↦ F β(λ Q x + v) Q`.
#[derive(Clone, Copy, Debug)]
pub struct TransformParams {
    pub f: Matrix3<f64>,
    pub q: Rotation<f64>,
    pub lambda: f64,
    pub v: Vector3<f64>,
}

impl TransformParams {
    pub fn identity() -> Self {
        Self {
            f: Matrix3::identity(),
            q: Rotation::identity(),
            lambda: 1.0,
            v: Vector3::zeros(),
        }
    }

    /// Parameters of applying `self` first and then `outer`.
    pub fn then(&self, outer: &TransformParams) -> TransformParams {
        TransformParams {
            f: outer.f * self.f,
            q: self.q * outer.q,
            lambda: self.lambda * outer.lambda,
            v: self.q.apply(&outer.v) * self.lambda + self.v,
        }
    }

    pub fn map_point(&self, x: &Vector3<f64>) -> Vector3<f64> {
        self.q.apply(x) * self.lambda + self.v
    }
}

/// `β̂(x) = F β(λ Q x + v) Q`.
pub struct TransformedField<'a, B: MatrixField + ?Sized> {
    pub inner: &'a B,
    pub params: TransformParams,
}

impl<B: MatrixField + ?Sized> MatrixField for TransformedField<'_, B> {
    fn eval(&self, x: &Vector3<f64>) -> Result<Matrix3<f64>> {
        let y = self.params.map_point(x);
        Ok(self.params.f * self.inner.eval(&y)? * self.params.q.matrix())
    }
}

pub fn transform_field<B: MatrixField + ?Sized>(beta: &B, params: TransformParams) -> Result<TransformedField<'_, B>> {
    if !(params.lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("dilation must be positive, got {}", params.lambda)));
    }
    Ok(TransformedField { inner: beta, params })
}

/// Row-wise curl `(curl β)_{ij} = ε_{jkl} ∂_k β_{il}` by central differences with step `h`.
pub fn discrete_curl<B: MatrixField + ?Sized>(beta: &B, x: &Vector3<f64>, h: f64) -> Result<Matrix3<f64>> {
    let mut grad = [Matrix3::zeros(); 3];
    for (k, g) in grad.iter_mut().enumerate() {
        let e = Vector3::from_fn(|d, _| if d == k { h } else { 0.0 });
        *g = (beta.eval(&(x + e))? - beta.eval(&(x - e))?) / (2.0 * h);
    }
    let mut curl = Matrix3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            let (k, l) = ((j + 1) % 3, (j + 2) % 3);
            curl[(i, j)] = grad[k][(i, l)] - grad[l][(i, k)];
        }
    }
    Ok(curl)
}

/// Push-forward of a current under the transformation: nodes map to
/// `Q^T (x - v) / λ` and multiplicities to `F θ / λ`.
pub fn transform_current(current: &PolyhedralCurrent, params: &TransformParams) -> PolyhedralCurrent {
    let qt = params.q.transpose();
    let mut out = current.clone();
    for node in out.nodes.iter_mut() {
        *node = qt.apply(&(*node - params.v)) / params.lambda;
    }
    for seg in out.segments.iter_mut() {
        seg.theta = params.f * seg.theta / params.lambda;
        seg.lattice_coords = None;
    }
    out.lattice = None;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{AxisBox, OrientedBox};
    use crate::network::Segment;
    use approx::assert_relative_eq;

    fn affine_beta() -> impl Fn(&Vector3<f64>) -> Matrix3<f64> {
        let b0 = Matrix3::new(0.3, -0.2, 0.1, 0.0, 0.5, 0.7, -0.4, 0.2, 0.9);
        move |x: &Vector3<f64>| {
            // β_{il}(x) = B0_{il} + Σ_k T_{ilk} x_k with a fixed, non-symmetric slope
            let mut m = b0;
            for i in 0..3 {
                for l in 0..3 {
                    for k in 0..3 {
                        m[(i, l)] += ((i * 7 + l * 3 + k * 5) % 11) as f64 * 0.1 * x[k];
                    }
                }
            }
            m
        }
    }

    fn sample_params() -> TransformParams {
        TransformParams {
            f: Matrix3::new(1.1, 0.2, 0.0, -0.3, 0.9, 0.4, 0.0, 0.1, 1.2),
            q: Rotation::from_axis_angle(&Vector3::new(0.3, -1.0, 0.5), 0.7),
            lambda: 1.7,
            v: Vector3::new(0.2, -0.1, 0.4),
        }
    }

    #[test]
    fn identity_transform_is_identity() {
        let f = FnField(affine_beta());
        let t = transform_field(&f, TransformParams::identity()).unwrap();
        let x = Vector3::new(0.3, 0.1, -0.7);
        assert_relative_eq!(t.eval(&x).unwrap(), f.eval(&x).unwrap());
    }

    #[test]
    fn curl_identity_for_affine_fields() {
        let f = FnField(affine_beta());
        let p = sample_params();
        let t = transform_field(&f, p).unwrap();
        for x in [Vector3::new(0.1, 0.2, 0.3), Vector3::new(-1.0, 0.5, 2.0)] {
            let lhs = discrete_curl(&t, &x, 1e-2).unwrap();
            let rhs = p.f * discrete_curl(&f, &p.map_point(&x), 1e-2).unwrap() * p.q.matrix() * p.lambda;
            assert_relative_eq!(lhs, rhs, epsilon = 1e-12, max_relative = 1e-12);
        }
    }

    #[test]
    fn composition_law() {
        let f = FnField(affine_beta());
        let p1 = sample_params();
        let p2 = TransformParams {
            f: Matrix3::new(0.8, 0.0, 0.1, 0.0, 1.0, 0.0, 0.2, 0.0, 1.3),
            q: Rotation::about_z(1.1),
            lambda: 0.6,
            v: Vector3::new(-0.3, 0.0, 0.9),
        };
        let once = transform_field(&f, p1).unwrap();
        let twice = transform_field(&once, p2).unwrap();
        let composed = transform_field(&f, p1.then(&p2)).unwrap();
        let x = Vector3::new(0.4, -0.2, 0.3);
        assert_relative_eq!(twice.eval(&x).unwrap(), composed.eval(&x).unwrap(), epsilon = 1e-12);
        let c2 = discrete_curl(&twice, &x, 1e-2).unwrap();
        let c1 = discrete_curl(&composed, &x, 1e-2).unwrap();
        assert_relative_eq!(c1, c2, epsilon = 1e-10);
    }

    #[test]
    fn trilinear_grid_is_exact_on_affine_fields() {
        let g = GridField::from_fn(
            Vector3::new(-2.0, -2.0, -2.0),
            0.25,
            [17, 17, 17],
            false,
            Interpolation::Trilinear,
            |x| Matrix3::from_fn(|i, j| (i as f64 + 1.0) * x[j] + j as f64),
        );
        let x = Vector3::new(0.33, -1.21, 1.07);
        let expected = Matrix3::from_fn(|i, j| (i as f64 + 1.0) * x[j] + j as f64);
        assert_relative_eq!(g.eval(&x).unwrap(), expected, epsilon = 1e-12);
        assert!(g.eval(&Vector3::new(3.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn pushforward_of_segment_measure() {
        let p = sample_params();
        let mut cur = PolyhedralCurrent::new(vec![Vector3::new(-3.0, 0.1, 0.2), Vector3::new(3.0, 0.4, -0.1)]);
        cur.segments.push(Segment::new(0, 1, Vector3::new(0.0, 1.0, 2.0)));
        let hat = transform_current(&cur, &p);
        // a unit cube A that the transformed segment crosses
        let mid = (hat.nodes[0] + hat.nodes[1]) * 0.5;
        let a = AxisBox::new((mid - Vector3::repeat(0.5)).into(), (mid + Vector3::repeat(0.5)).into()).unwrap();
        let lhs = hat.mass_in(&a.as_oriented());
        let image = OrientedBox {
            center: p.map_point(&a.as_oriented().center),
            axes: *p.q.matrix(),
            half_widths: Vector3::repeat(0.5 * p.lambda),
        };
        let rhs = p.f * cur.mass_in(&image) * p.q.matrix() / (p.lambda * p.lambda);
        assert!(lhs.norm() > 0.1);
        assert_relative_eq!(lhs, rhs, epsilon = 1e-12);
    }
}
