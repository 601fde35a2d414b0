use nalgebra::{Matrix3, SMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Rotation;
use crate::scalar::Real;

/// Index of `A_{ij}` in the row-major vectorization of a 3x3 matrix.
#[inline]
pub fn vec_index(i: usize, j: usize) -> usize {
    3 * i + j
}

/// Fourth-order elasticity tensor acting on 3x3 matrices by `(CA)_{ij} = C_{ijkl} A_{kl}`.
///
/// Stored as the 9x9 matrix of the induced map on row-major vectorized
/// matrices; the 81 entries `C_{ijkl}` are its reshaping. The coercivity
/// constant `c0` of `CA·A >= c0 |A + A^T|^2` is computed once at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct ElasticTensor<T: Real = f64> {
    matrix: SMatrix<T, 9, 9>,
    c0: T,
}

/// Outcome of [`ElasticTensor::validate`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ValidationReport<T: Real = f64> {
    pub major_symmetry_residual: T,
    pub skew_kernel_residual: T,
    pub c0: T,
}

impl<T: Real> ValidationReport<T> {
    pub fn tolerance() -> T {
        let eps = T::default_epsilon() * T::lit(1000.0);
        if eps > T::lit(1e-12) {
            eps
        } else {
            T::lit(1e-12)
        }
    }

    pub fn is_admissible(&self) -> bool {
        let tol = Self::tolerance();
        self.major_symmetry_residual <= tol && self.skew_kernel_residual <= tol && self.c0 > T::zero()
    }
}

impl<T: Real> ElasticTensor<T> {
    /// Builds a tensor from `C_{ijkl}` (index `27i + 9j + 3k + l`) without checking admissibility.
    pub fn from_entries(entries: &[T; 81]) -> Self {
        let matrix = SMatrix::<T, 9, 9>::from_fn(|r, c| entries[9 * r + c]);
        Self::from_matrix(matrix)
    }

    pub fn from_matrix(matrix: SMatrix<T, 9, 9>) -> Self {
        let c0 = symmetric_min_eigenvalue(&matrix) / T::lit(4.0);
        Self { matrix, c0 }
    }

    /// `C_{ijkl} = λ δ_ij δ_kl + μ (δ_ik δ_jl + δ_il δ_jk)`.
    pub fn isotropic(lambda: T, mu: T) -> Result<Self> {
        if !(mu > T::zero()) || !(T::lit(3.0) * lambda + T::lit(2.0) * mu > T::zero()) {
            return Err(Error::InvalidTensor(format!(
                "isotropic moduli not coercive (lambda={}, mu={})",
                lambda.as_f64(),
                mu.as_f64()
            )));
        }
        let c = Self::from_entries(&entries_from_fn(|i, j, k, l| {
            lambda * delta::<T>(i, j) * delta(k, l) + mu * (delta::<T>(i, k) * delta(j, l) + delta::<T>(i, l) * delta(j, k))
        }));
        c.ensure_admissible()?;
        Ok(c)
    }

    /// Cubic tensor in the lattice frame from the Voigt constants `c11, c12, c44`.
    pub fn cubic(c11: T, c12: T, c44: T) -> Result<Self> {
        if !(c11 - c12 > T::zero()) || !(c11 + T::lit(2.0) * c12 > T::zero()) || !(c44 > T::zero()) {
            return Err(Error::InvalidTensor(format!(
                "cubic stability violated (c11={}, c12={}, c44={})",
                c11.as_f64(),
                c12.as_f64(),
                c44.as_f64()
            )));
        }
        let c = Self::from_entries(&entries_from_fn(|i, j, k, l| {
            if i == j && k == l {
                if i == k {
                    c11
                } else {
                    c12
                }
            } else if i != j && ((i == k && j == l) || (i == l && j == k)) {
                c44
            } else {
                T::zero()
            }
        }));
        c.ensure_admissible()?;
        Ok(c)
    }

    pub fn zero() -> Self {
        Self::from_matrix(SMatrix::<T, 9, 9>::zeros())
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize, k: usize, l: usize) -> T {
        self.matrix[(vec_index(i, j), vec_index(k, l))]
    }

    pub fn entries(&self) -> [T; 81] {
        let mut out = [T::zero(); 81];
        for (r, chunk) in out.chunks_mut(9).enumerate() {
            for (c, v) in chunk.iter_mut().enumerate() {
                *v = self.matrix[(r, c)];
            }
        }
        out
    }

    pub fn matrix(&self) -> &SMatrix<T, 9, 9> {
        &self.matrix
    }

    pub fn c0(&self) -> T {
        self.c0
    }

    pub fn apply(&self, a: &Matrix3<T>) -> Matrix3<T> {
        let v = SMatrix::<T, 9, 1>::from_fn(|r, _| a[(r / 3, r % 3)]);
        let w = self.matrix * v;
        Matrix3::from_fn(|i, j| w[vec_index(i, j)])
    }

    /// `C A · B`.
    pub fn pair(&self, a: &Matrix3<T>, b: &Matrix3<T>) -> T {
        self.apply(a).component_mul(b).sum()
    }

    /// Elastic energy density `½ C A · A`.
    pub fn energy_density(&self, a: &Matrix3<T>) -> T {
        T::lit(0.5) * self.pair(a, a)
    }

    /// The 3x3 matrix `K_{ik} = C_{ijkl} u_j v_l`, so that `C(a⊗v)·(c⊗u) = c · K a`.
    pub fn contract(&self, u: &nalgebra::Vector3<T>, v: &nalgebra::Vector3<T>) -> Matrix3<T> {
        let mut k = Matrix3::zeros();
        for i in 0..3 {
            for kk in 0..3 {
                let mut s = T::zero();
                for j in 0..3 {
                    for l in 0..3 {
                        s += self.entry(i, j, kk, l) * u[j] * v[l];
                    }
                }
                k[(i, kk)] = s;
            }
        }
        k
    }

    /// Residuals of the admissibility conditions, relative to the largest entry.
    pub fn validate(&self) -> ValidationReport<T> {
        let scale = self.matrix.amax();
        let scale = if scale > T::zero() { scale } else { T::one() };
        let major = (self.matrix - self.matrix.transpose()).amax() / scale;
        let mut skew = T::zero();
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let mut w = Matrix3::<T>::zeros();
            w[(p, q)] = T::one();
            w[(q, p)] = -T::one();
            let r = self.apply(&w).amax() / scale;
            if r > skew {
                skew = r;
            }
        }
        ValidationReport {
            major_symmetry_residual: major,
            skew_kernel_residual: skew,
            c0: self.c0,
        }
    }

    pub fn ensure_admissible(&self) -> Result<()> {
        let report = self.validate();
        if report.is_admissible() {
            Ok(())
        } else {
            Err(Error::InvalidTensor(format!(
                "major symmetry residual {:e}, skew kernel residual {:e}, c0 {:e}",
                report.major_symmetry_residual.as_f64(),
                report.skew_kernel_residual.as_f64(),
                report.c0.as_f64()
            )))
        }
    }

    /// `C_Q` with `C_Q A·B = C(QAQ^T)·(QBQ^T)`.
    pub fn rotate(&self, q: &Rotation<T>) -> Self {
        let qm = q.matrix();
        // K_{(ab),(ij)} = Q_ai Q_bj maps vec(A) to vec(Q A Q^T).
        let k = SMatrix::<T, 9, 9>::from_fn(|r, c| qm[(r / 3, c / 3)] * qm[(r % 3, c % 3)]);
        let m = k.transpose() * self.matrix * k;
        // Spectrum is unchanged by the orthogonal conjugation.
        Self { matrix: m, c0: self.c0 }
    }
}

#[inline]
fn delta<T: Real>(i: usize, j: usize) -> T {
    if i == j {
        T::one()
    } else {
        T::zero()
    }
}

fn entries_from_fn<T: Real>(f: impl Fn(usize, usize, usize, usize) -> T) -> [T; 81] {
    let mut e = [T::zero(); 81];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    e[27 * i + 9 * j + 3 * k + l] = f(i, j, k, l);
                }
            }
        }
    }
    e
}

/// Orthonormal basis of symmetric 3x3 matrices, as vectorized 9-vectors.
fn symmetric_basis<T: Real>() -> [SMatrix<T, 9, 1>; 6] {
    let s = T::one() / T::lit(2.0).sqrt();
    let mut basis = [SMatrix::<T, 9, 1>::zeros(); 6];
    for i in 0..3 {
        basis[i][vec_index(i, i)] = T::one();
    }
    for (n, (p, q)) in [(0usize, 1usize), (0, 2), (1, 2)].into_iter().enumerate() {
        basis[3 + n][vec_index(p, q)] = s;
        basis[3 + n][vec_index(q, p)] = s;
    }
    basis
}

fn symmetric_min_eigenvalue<T: Real>(m: &SMatrix<T, 9, 9>) -> T {
    let basis = symmetric_basis::<T>();
    let sym = (m + m.transpose()) * T::lit(0.5);
    let restricted = SMatrix::<T, 6, 6>::from_fn(|a, b| (basis[a].transpose() * sym * basis[b])[(0, 0)]);
    let eig = SymmetricEigen::new(restricted);
    eig.eigenvalues
        .iter()
        .copied()
        .fold(eig.eigenvalues[0], |acc, v| if v < acc { v } else { acc })
}

/// JSON description of a tensor: `{kind, parameters | entries, frame}`.
///
/// `frame` (optional) holds the lattice axes as columns in lab coordinates;
/// the tensor is built in the lattice frame and then expressed in the lab frame.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TensorSpec {
    pub kind: TensorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameters: Option<TensorParameters>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entries: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<[[f64; 3]; 3]>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum TensorKind {
    Isotropic,
    Cubic,
    Raw,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged, deny_unknown_fields)]
pub enum TensorParameters {
    Isotropic { lambda: f64, mu: f64 },
    Cubic { c11: f64, c12: f64, c44: f64 },
}

impl TensorSpec {
    pub fn isotropic(lambda: f64, mu: f64) -> Self {
        Self {
            kind: TensorKind::Isotropic,
            parameters: Some(TensorParameters::Isotropic { lambda, mu }),
            entries: None,
            frame: None,
        }
    }

    pub fn cubic(c11: f64, c12: f64, c44: f64) -> Self {
        Self {
            kind: TensorKind::Cubic,
            parameters: Some(TensorParameters::Cubic { c11, c12, c44 }),
            entries: None,
            frame: None,
        }
    }

    pub fn raw(c: &ElasticTensor<f64>) -> Self {
        Self {
            kind: TensorKind::Raw,
            parameters: None,
            entries: Some(c.entries().to_vec()),
            frame: None,
        }
    }

    pub fn build(&self) -> Result<ElasticTensor<f64>> {
        let lattice = match (self.kind, &self.parameters, &self.entries) {
            (TensorKind::Isotropic, Some(TensorParameters::Isotropic { lambda, mu }), None) => {
                ElasticTensor::isotropic(*lambda, *mu)?
            }
            (TensorKind::Cubic, Some(TensorParameters::Cubic { c11, c12, c44 }), None) => {
                ElasticTensor::cubic(*c11, *c12, *c44)?
            }
            (TensorKind::Raw, None, Some(entries)) => {
                let arr: [f64; 81] = entries.as_slice().try_into().map_err(|_| {
                    Error::InvalidTensor(format!("raw tensor needs 81 entries, got {}", entries.len()))
                })?;
                let c = ElasticTensor::from_entries(&arr);
                c.ensure_admissible()?;
                c
            }
            _ => {
                return Err(Error::InvalidTensor(format!(
                    "kind {:?} does not match the supplied parameters/entries",
                    self.kind
                )))
            }
        };
        match self.frame {
            None => Ok(lattice),
            Some(rows) => {
                let frame = Rotation::new(Matrix3::from_fn(|i, j| rows[i][j]))?;
                Ok(lattice.rotate(&frame.transpose()))
            }
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
