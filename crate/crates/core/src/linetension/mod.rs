//! The one-dimensional problem defining the line-tension density `ψ_C(b, t)`
//! and the straight-dislocation strain `β_{b,t}`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix3, SymmetricEigen, Vector3};
use serde::Serialize;

use crate::elasticity::ElasticTensor;
use crate::error::{Error, Result};
use crate::geometry::{frame, rotation_to, Rotation};
use crate::quadrature::gauss_legendre_on;

/// Discretization of the angular problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ProfileOptions {
    /// Number of Fourier modes `M`.
    pub modes: usize,
    /// Trapezoid points `N_q >= 4M + 4`.
    pub quadrature: usize,
    /// Re-solve with `2 N_q` points and fail if the energy moves by more than 1e-10 (relative).
    pub check_aliasing: bool,
}

impl ProfileOptions {
    pub fn new(modes: usize) -> Self {
        Self {
            modes,
            quadrature: 4 * modes + 4,
            check_aliasing: true,
        }
    }

    pub fn unchecked(modes: usize) -> Self {
        Self {
            check_aliasing: false,
            ..Self::new(modes)
        }
    }

    fn validate(&self) -> Result<()> {
        if self.modes < 1 {
            return Err(Error::InvalidArgument("need at least one Fourier mode".into()));
        }
        if self.quadrature < 4 * self.modes + 4 {
            return Err(Error::InvalidArgument(format!(
                "quadrature {} below 4M+4 = {}",
                self.quadrature,
                4 * self.modes + 4
            )));
        }
        Ok(())
    }
}

/// Minimizer `(f, g)` of the angular problem.
///
/// `f(θ) = a₀ + Σ_k a_k cos kθ + c_k sin kθ` with `2π a₀ = b`, and
/// `β_{b,t}(Φ_t(r,θ,z)) = (f(θ) ⊗ Q_t e_θ + g ⊗ Q_t e_r) / r`.
#[derive(Clone, Debug)]
pub struct AngularProfile {
    pub a0: Vector3<f64>,
    pub cos: Vec<Vector3<f64>>,
    pub sin: Vec<Vector3<f64>>,
    pub g: Vector3<f64>,
    pub b: Vector3<f64>,
    pub t: Vector3<f64>,
    pub frame: Rotation,
    pub tensor: ElasticTensor,
    pub psi: f64,
    pub null_space_dim: usize,
    /// Norm of the top quarter of the modes relative to all modes; a value
    /// that does not shrink under refinement signals missing spectral decay.
    pub tail_ratio: f64,
}

impl AngularProfile {
    pub fn modes(&self) -> usize {
        self.cos.len()
    }

    pub fn f(&self, theta: f64) -> Vector3<f64> {
        let mut v = self.a0;
        for k in 0..self.cos.len() {
            let kt = (k + 1) as f64 * theta;
            v += self.cos[k] * kt.cos() + self.sin[k] * kt.sin();
        }
        v
    }

    /// `β̃(θ) = f(θ) ⊗ Q e_θ + g ⊗ Q e_r`, the field on the unit circle.
    pub fn beta_unit(&self, theta: f64) -> Matrix3<f64> {
        let (er, et, _) = frame(theta);
        self.f(theta) * self.frame.apply(&et).transpose() + self.g * self.frame.apply(&er).transpose()
    }

    /// `β_{b,t}(x)`; independent of the axial coordinate.
    pub fn eval_beta_bt(&self, x: &Vector3<f64>) -> Result<Matrix3<f64>> {
        let y = self.frame.transpose().apply(x);
        let r = y[0].hypot(y[1]);
        if r <= 1e-12 {
            return Err(Error::OnAxis([x[0], x[1], x[2]]));
        }
        Ok(self.beta_unit(y[1].atan2(y[0])) / r)
    }

    /// `∮ β_{b,t} · dl` along the circle of radius `rho` (trapezoid rule, `n` points).
    pub fn circulation(&self, rho: f64, n: usize) -> Result<Vector3<f64>> {
        let mut total = Vector3::zeros();
        for q in 0..n {
            let theta = 2.0 * PI * q as f64 / n as f64;
            let (er, et, _) = frame(theta);
            let x = self.frame.apply(&(er * rho));
            total += self.eval_beta_bt(&x)? * self.frame.apply(&et) * (rho * 2.0 * PI / n as f64);
        }
        Ok(total)
    }
}

/// Minimizes the angular energy for `(b, t)` using the frame [`rotation_to`]`(t)`.
pub fn solve_profile(c: &ElasticTensor, b: &Vector3<f64>, t: &Vector3<f64>, opts: ProfileOptions) -> Result<AngularProfile> {
    let q = rotation_to(t)?;
    solve_profile_in_frame(c, b, &q, opts)
}

/// As [`solve_profile`] with an explicit frame `Q` (`Q e₃ = t`).
pub fn solve_profile_in_frame(c: &ElasticTensor, b: &Vector3<f64>, q: &Rotation, opts: ProfileOptions) -> Result<AngularProfile> {
    opts.validate()?;
    c.ensure_admissible()?;
    let mut profile = solve_once(c, b, q, opts.modes, opts.quadrature)?;
    if opts.check_aliasing {
        let fine = solve_once(c, b, q, opts.modes, 2 * opts.quadrature)?;
        let change = (fine.psi - profile.psi).abs();
        if change > 1e-10 * profile.psi.max(f64::MIN_POSITIVE) && change > 0.0 {
            return Err(Error::Aliasing {
                change,
                quadrature: 2 * opts.quadrature,
            });
        }
    }
    profile.tensor = c.clone();
    Ok(profile)
}

/// `ψ_C(b, t)`.
pub fn psi(c: &ElasticTensor, b: &Vector3<f64>, t: &Vector3<f64>, opts: ProfileOptions) -> Result<f64> {
    Ok(solve_profile(c, b, t, opts)?.psi)
}

/// The symmetric matrix `Γ(t)` with `ψ_C(b, t) = b · Γ(t) b`.
///
/// The angular problem is quadratic with data linear in `b`, so six solves
/// (unit vectors and their pairwise sums) determine `Γ`.
pub fn tension_matrix(c: &ElasticTensor, t: &Vector3<f64>, opts: ProfileOptions) -> Result<Matrix3<f64>> {
    let q = rotation_to(t)?;
    let mut g = Matrix3::zeros();
    let e = |i: usize| Vector3::from_fn(|r, _| if r == i { 1.0 } else { 0.0 });
    for i in 0..3 {
        g[(i, i)] = solve_profile_in_frame(c, &e(i), &q, opts)?.psi;
    }
    for i in 0..3 {
        for j in i + 1..3 {
            let s = solve_profile_in_frame(c, &(e(i) + e(j)), &q, opts)?.psi;
            g[(i, j)] = 0.5 * (s - g[(i, i)] - g[(j, j)]);
            g[(j, i)] = g[(i, j)];
        }
    }
    Ok(g)
}

struct Sample {
    weight: f64,
    theta: f64,
    kuu: Matrix3<f64>,
    kuw: Matrix3<f64>,
    kww: Matrix3<f64>,
    u: Vector3<f64>,
    w: Vector3<f64>,
}

fn samples(c: &ElasticTensor, q: &Rotation, n: usize) -> Vec<Sample> {
    (0..n)
        .map(|i| {
            let theta = 2.0 * PI * i as f64 / n as f64;
            let (er, et, _) = frame(theta);
            let u = q.apply(&et);
            let w = q.apply(&er);
            Sample {
                weight: 2.0 * PI / n as f64,
                theta,
                kuu: c.contract(&u, &u),
                kuw: c.contract(&u, &w),
                kww: c.contract(&w, &w),
                u,
                w,
            }
        })
        .collect()
}

fn solve_once(c: &ElasticTensor, b: &Vector3<f64>, q: &Rotation, m: usize, nq: usize) -> Result<AngularProfile> {
    let a0 = b / (2.0 * PI);
    // Blocks 0..2M are the cos/sin coefficients of f, block 2M is g.
    let nb = 2 * m + 1;
    let n = 3 * nb;
    let mut h = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    let pts = samples(c, q, nq);
    let mut basis = vec![0.0; 2 * m];
    for s in &pts {
        for k in 0..m {
            let kt = (k + 1) as f64 * s.theta;
            basis[k] = kt.cos();
            basis[m + k] = kt.sin();
        }
        let kuu_a0 = s.kuu * a0;
        let kwu_a0 = s.kuw.transpose() * a0;
        for i in 0..2 * m {
            let wi = s.weight * basis[i];
            if wi == 0.0 {
                continue;
            }
            for j in i..2 * m {
                let f = wi * basis[j];
                if f == 0.0 {
                    continue;
                }
                add_block(&mut h, i, j, &(s.kuu * f));
            }
            add_block(&mut h, i, 2 * m, &(s.kuw * wi));
            add_vec(&mut rhs, i, &(kuu_a0 * wi));
        }
        add_block(&mut h, 2 * m, 2 * m, &(s.kww * s.weight));
        add_vec(&mut rhs, 2 * m, &(kwu_a0 * s.weight));
    }
    // Mirror the upper block triangle.
    for i in 0..n {
        for j in 0..i {
            h[(i, j)] = h[(j, i)];
        }
    }
    let (x, null_space_dim) = spd_solve(h, -rhs)?;
    let block = |k: usize| Vector3::new(x[3 * k], x[3 * k + 1], x[3 * k + 2]);
    let cos: Vec<_> = (0..m).map(block).collect();
    let sin: Vec<_> = (0..m).map(|k| block(m + k)).collect();
    let g = block(2 * m);
    let total: f64 = cos.iter().chain(&sin).map(|v| v.norm_squared()).sum();
    let tail: f64 = (3 * m / 4..m).map(|k| cos[k].norm_squared() + sin[k].norm_squared()).sum();
    let tail_ratio = if total > 0.0 { (tail / total).sqrt() } else { 0.0 };
    let mut profile = AngularProfile {
        a0,
        cos,
        sin,
        g,
        b: *b,
        t: q.apply(&Vector3::z()),
        frame: *q,
        tensor: ElasticTensor::zero(),
        psi: 0.0,
        null_space_dim,
        tail_ratio,
    };
    profile.psi = pts
        .iter()
        .map(|s| {
            let f = profile.f(s.theta);
            let beta = f * s.u.transpose() + g * s.w.transpose();
            s.weight * c.energy_density(&beta)
        })
        .sum();
    Ok(profile)
}

#[inline]
fn add_block(h: &mut DMatrix<f64>, i: usize, j: usize, k: &Matrix3<f64>) {
    for a in 0..3 {
        for b in 0..3 {
            h[(3 * i + a, 3 * j + b)] += k[(a, b)];
        }
    }
}

#[inline]
fn add_vec(v: &mut DVector<f64>, i: usize, k: &Vector3<f64>) {
    for a in 0..3 {
        v[3 * i + a] += k[a];
    }
}

/// Cholesky solve; on failure a 1e-12 Tikhonov shift, reporting the
/// numerical null-space dimension.
fn spd_solve(h: DMatrix<f64>, rhs: DVector<f64>) -> Result<(DVector<f64>, usize)> {
    if let Some(ch) = h.clone().cholesky() {
        let x = ch.solve(&rhs);
        if x.iter().all(|v| v.is_finite()) {
            return Ok((x, 0));
        }
    }
    let eig = SymmetricEigen::new(h.clone());
    let top = eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
    let null = eig.eigenvalues.iter().filter(|&&l| l < 1e-10 * top).count();
    let n = h.nrows();
    let shifted = h + DMatrix::<f64>::identity(n, n) * (1e-12 * top);
    let ch = shifted.cholesky().ok_or_else(|| Error::NoConvergence {
        what: "regularized Cholesky",
        iterations: 1,
        residual: f64::NAN,
    })?;
    Ok((ch.solve(&rhs), null))
}

fn check_radii(h: f64, outer: f64, inner: f64) -> Result<()> {
    if inner > 0.0 && outer > inner && h > 0.0 && outer.is_finite() && h.is_finite() {
        Ok(())
    } else {
        Err(Error::Geometry(format!(
            "need 0 < r < R and h > 0, got r={inner}, R={outer}, h={h}"
        )))
    }
}

/// `h ln(R/r) ψ`.
pub fn cylinder_energy_exact(profile: &AngularProfile, h: f64, outer: f64, inner: f64) -> Result<f64> {
    check_radii(h, outer, inner)?;
    Ok(h * (outer / inner).ln() * profile.psi)
}

/// Tensor-product quadrature of `½ C β_{b,t}·β_{b,t}` over `Q_t T_h^{R,r}`:
/// Gauss-Legendre in `ln ρ` and `z`, trapezoid in `θ`, `n` points each.
pub fn cylinder_energy_quadrature(profile: &AngularProfile, h: f64, outer: f64, inner: f64, n: usize) -> Result<f64> {
    check_radii(h, outer, inner)?;
    if n < 2 {
        return Err(Error::InvalidArgument(format!("resolution {n} below 2 points per dimension")));
    }
    let (sr, wr) = gauss_legendre_on(n, inner.ln(), outer.ln());
    let (sz, wz) = gauss_legendre_on(n, 0.0, h);
    let wt = 2.0 * PI / n as f64;
    let mut total = 0.0;
    for (s, ws) in sr.iter().zip(&wr) {
        let rho = s.exp();
        for q in 0..n {
            let theta = 2.0 * PI * q as f64 / n as f64;
            for (z, wzz) in sz.iter().zip(&wz) {
                let local = Vector3::new(rho * theta.cos(), rho * theta.sin(), *z);
                let beta = profile.eval_beta_bt(&profile.frame.apply(&local))?;
                // dV = ρ dρ dθ dz = ρ² ds dθ dz
                total += ws * wt * wzz * rho * rho * profile.tensor.energy_density(&beta);
            }
        }
    }
    Ok(total)
}
