//! The hollow-cylinder cell problem and the coercivity floor.
//!
//! The displacement `u` is trilinear on a grid in `(s, θ, z)` with
//! `s = ln ρ`, periodic in `θ`, with free boundaries in `s` and `z`.
//! Writing `ρ Du = u_s ⊗ Q e_r + u_θ ⊗ Q e_θ + ρ u_z ⊗ t` makes the
//! `ρ² ds dθ dz` volume element disappear from the in-plane terms.

mod solver;

pub use solver::{BlockCsr, CgReport};

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::elasticity::{ElasticTensor, MixedGrowth};
use crate::error::{Error, Result};
use crate::geometry::frame;
use crate::linetension::{solve_profile, AngularProfile, ProfileOptions};
use crate::quadrature::{gauss_legendre_on, integrate_adaptive};

/// Node counts of the cylindrical grid (`ln ρ` uniform, `θ` periodic, `z` uniform).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CylGrid {
    pub n_r: usize,
    pub n_theta: usize,
    pub n_z: usize,
}

impl CylGrid {
    pub fn new(n_r: usize, n_theta: usize, n_z: usize) -> Result<Self> {
        if n_r < 4 || n_theta < 4 || n_z < 4 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 4 nodes per direction, got ({n_r}, {n_theta}, {n_z})"
            )));
        }
        Ok(Self { n_r, n_theta, n_z })
    }

    /// Radial node count giving `per_decade` cells per factor ten in `R/r`.
    pub fn with_density(per_decade: f64, outer_over_inner: f64, n_theta: usize, n_z: usize) -> Result<Self> {
        let cells = (per_decade * outer_over_inner.log10()).ceil().max(3.0) as usize;
        Self::new(cells + 1, n_theta, n_z)
    }

    /// Doubles the number of cells in every direction (nested refinement).
    pub fn refined(&self) -> Self {
        Self {
            n_r: 2 * self.n_r - 1,
            n_theta: 2 * self.n_theta,
            n_z: 2 * self.n_z - 1,
        }
    }

    pub fn nodes(&self) -> usize {
        self.n_r * self.n_theta * self.n_z
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n_theta + j % self.n_theta) * self.n_z + k
    }
}

/// Geometry of the cell problem: `T_h^{R,r}` around the axis `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellGeometry {
    pub h: f64,
    pub outer: f64,
    pub inner: f64,
}

impl CellGeometry {
    pub fn new(h: f64, outer: f64, inner: f64) -> Result<Self> {
        if !(inner > 0.0 && 2.0 * inner <= outer && outer <= h) {
            return Err(Error::Geometry(format!(
                "need 0 < 2r <= R <= h, got r={inner}, R={outer}, h={h}"
            )));
        }
        Ok(Self { h, outer, inner })
    }

    pub fn log_ratio(&self) -> f64 {
        (self.outer / self.inner).ln()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CellSolution {
    /// `inf cyl`: minimal energy divided by `h ln(R/r)`.
    pub value: f64,
    /// Unnormalized minimal energy.
    pub energy: f64,
    pub psi: f64,
    pub iterations: usize,
    pub residual: f64,
    #[serde(skip)]
    pub grid: CylGrid,
    #[serde(skip)]
    pub u: Vec<Vector3<f64>>,
    #[serde(skip)]
    pub profile: Option<AngularProfile>,
}

impl CellSolution {
    pub fn gap(&self) -> f64 {
        if self.psi > 0.0 {
            (self.psi - self.value) / self.psi
        } else {
            0.0
        }
    }

    /// Circulation of `β_{b,t} + Du` around the grid circle at radial node
    /// `i` and axial node `k`: `∫ f dθ` plus the telescoping sum of `Du`.
    pub fn circulation(&self, i: usize, k: usize) -> Vector3<f64> {
        let g = self.grid;
        let from_profile = match &self.profile {
            Some(p) => {
                let n = 4 * p.modes() + 4;
                (0..n).map(|q| p.f(2.0 * PI * q as f64 / n as f64)).sum::<Vector3<f64>>() * (2.0 * PI / n as f64)
            }
            None => Vector3::zeros(),
        };
        let mut jump = Vector3::zeros();
        for j in 0..g.n_theta {
            jump += self.u[g.node(i, j + 1, k)] - self.u[g.node(i, j, k)];
        }
        from_profile + jump
    }
}

/// Options for [`infcyl`].
#[derive(Clone, Copy, Debug)]
pub struct CellOptions {
    pub profile: ProfileOptions,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for CellOptions {
    fn default() -> Self {
        Self {
            profile: ProfileOptions::new(32),
            tolerance: 1e-10,
            max_iterations: 50_000,
        }
    }
}

/// Minimizes `(1/(h ln(R/r))) ∫ ½ C(β_{b,t} + Du)·(β_{b,t} + Du)` over the grid.
pub fn infcyl(
    c: &ElasticTensor,
    b: &Vector3<f64>,
    t: &Vector3<f64>,
    geometry: CellGeometry,
    grid: CylGrid,
    opts: CellOptions,
) -> Result<CellSolution> {
    let profile = solve_profile(c, b, t, opts.profile)?;
    infcyl_with_profile(&profile, geometry, grid, opts)
}

pub fn infcyl_with_profile(
    profile: &AngularProfile,
    geometry: CellGeometry,
    grid: CylGrid,
    opts: CellOptions,
) -> Result<CellSolution> {
    CylGrid::new(grid.n_r, grid.n_theta, grid.n_z)?;
    let lr = geometry.log_ratio();
    let e0 = geometry.h * lr * profile.psi;
    let (k, rhs) = assemble(profile, &geometry, &grid);
    let (u, report) = solver::cg_singular(&k, &rhs, opts.tolerance, opts.max_iterations)?;
    let ku = k.apply(&u);
    let mut linear = 0.0;
    let mut quad = 0.0;
    for n in 0..u.len() {
        linear += rhs[n].dot(&u[n]);
        quad += ku[n].dot(&u[n]);
    }
    let energy = e0 + linear + 0.5 * quad;
    Ok(CellSolution {
        value: energy / (geometry.h * lr),
        energy,
        psi: profile.psi,
        iterations: report.iterations,
        residual: report.relative_residual,
        grid,
        u,
        profile: Some(profile.clone()),
    })
}

const QS: usize = 4;
const QT: usize = 6;
const QZ: usize = 2;

/// Element matrices on the θ-cell `j`: `M0 + e^{s_i} M1 + e^{2 s_i} M2`, and
/// element vectors `V0 + e^{s_i} V1`.
struct ThetaCell {
    m: [[[Matrix3<f64>; 8]; 8]; 3],
    v: [[Vector3<f64>; 8]; 2],
}

fn theta_cell(profile: &AngularProfile, j: usize, ds: f64, dtheta: f64, dz: f64) -> ThetaCell {
    let c = &profile.tensor;
    let t = profile.frame.apply(&Vector3::z());
    let (xs, ws) = gauss_legendre_on(QS, 0.0, ds);
    let (xt, wt) = gauss_legendre_on(QT, 0.0, dtheta);
    let (xz, wz) = gauss_legendre_on(QZ, 0.0, dz);
    let mut cell = ThetaCell {
        m: [[[Matrix3::zeros(); 8]; 8]; 3],
        v: [[Vector3::zeros(); 8]; 2],
    };
    let hat = |x: f64, w: f64, a: usize| if a == 0 { 1.0 - x / w } else { x / w };
    let dhat = |w: f64, a: usize| if a == 0 { -1.0 / w } else { 1.0 / w };
    for (qt, wqt) in xt.iter().zip(&wt) {
        let theta = j as f64 * dtheta + qt;
        let (er, et, _) = frame(theta);
        let a = profile.frame.apply(&er);
        let bvec = profile.frame.apply(&et);
        let d = [a, bvec, t];
        let mut kk = [[Matrix3::zeros(); 3]; 3];
        for (p, dp) in d.iter().enumerate() {
            for (q, dq) in d.iter().enumerate() {
                kk[p][q] = c.contract(dp, dq);
            }
        }
        let beta0 = profile.f(theta) * bvec.transpose() + profile.g * a.transpose();
        let cb = c.apply(&beta0);
        let cbd = [cb * a, cb * bvec, cb * t];
        for (qs, wqs) in xs.iter().zip(&ws) {
            let es = qs.exp();
            for (qz, wqz) in xz.iter().zip(&wz) {
                let w = wqt * wqs * wqz;
                // grad[n] = (∂_s N_n, ∂_θ N_n, ∂_z N_n)
                let mut grad = [[0.0; 3]; 8];
                for (n, gn) in grad.iter_mut().enumerate() {
                    let (ia, ib, ic) = (n >> 2, (n >> 1) & 1, n & 1);
                    let (ns, nt, nz) = (hat(*qs, ds, ia), hat(*qt, dtheta, ib), hat(*qz, dz, ic));
                    *gn = [dhat(ds, ia) * nt * nz, ns * dhat(dtheta, ib) * nz, ns * nt * dhat(dz, ic)];
                }
                for n in 0..8 {
                    let gn = grad[n];
                    cell.v[0][n] += (cbd[0] * gn[0] + cbd[1] * gn[1]) * w;
                    cell.v[1][n] += cbd[2] * (gn[2] * es * w);
                    for m in 0..8 {
                        let gm = grad[m];
                        let mut m0 = Matrix3::zeros();
                        for p in 0..2 {
                            for q in 0..2 {
                                m0 += kk[p][q] * (gn[p] * gm[q]);
                            }
                        }
                        let mut m1 = Matrix3::zeros();
                        for q in 0..2 {
                            m1 += kk[2][q] * (gn[2] * gm[q]) + kk[q][2] * (gn[q] * gm[2]);
                        }
                        cell.m[0][n][m] += m0 * w;
                        cell.m[1][n][m] += m1 * (es * w);
                        cell.m[2][n][m] += kk[2][2] * (gn[2] * gm[2] * es * es * w);
                    }
                }
            }
        }
    }
    cell
}

fn assemble(profile: &AngularProfile, geometry: &CellGeometry, grid: &CylGrid) -> (BlockCsr, Vec<Vector3<f64>>) {
    let s0 = geometry.inner.ln();
    let ds = geometry.log_ratio() / (grid.n_r - 1) as f64;
    let dtheta = 2.0 * PI / grid.n_theta as f64;
    let dz = geometry.h / (grid.n_z - 1) as f64;
    let mut k = BlockCsr::stencil27(grid);
    let mut rhs = vec![Vector3::zeros(); grid.nodes()];
    for j in 0..grid.n_theta {
        let cell = theta_cell(profile, j, ds, dtheta, dz);
        for i in 0..grid.n_r - 1 {
            let e1 = (s0 + i as f64 * ds).exp();
            let e2 = e1 * e1;
            let mut local = [[Matrix3::zeros(); 8]; 8];
            for n in 0..8 {
                for m in 0..8 {
                    local[n][m] = cell.m[0][n][m] + cell.m[1][n][m] * e1 + cell.m[2][n][m] * e2;
                }
            }
            let local_v: Vec<Vector3<f64>> = (0..8).map(|n| cell.v[0][n] + cell.v[1][n] * e1).collect();
            for kz in 0..grid.n_z - 1 {
                let ids: [usize; 8] =
                    std::array::from_fn(|n| grid.node(i + (n >> 2), j + ((n >> 1) & 1), kz + (n & 1)));
                for n in 0..8 {
                    rhs[ids[n]] += local_v[n];
                    for m in 0..8 {
                        k.add(ids[n], ids[m], &local[n][m]);
                    }
                }
            }
        }
    }
    (k, rhs)
}

/// `h ∫_r^R Φ_p**(ε|b|/(2πρ)) ρ dρ`, by adaptive quadrature.
pub fn coercivity_lower_bound(
    mg: &MixedGrowth,
    eps: f64,
    b: &Vector3<f64>,
    inner: f64,
    outer: f64,
    h: f64,
) -> Result<f64> {
    if !(eps > 0.0 && eps <= inner && inner < outer && outer <= h) {
        return Err(Error::Geometry(format!(
            "need 0 < eps <= r < R <= h, got eps={eps}, r={inner}, R={outer}, h={h}"
        )));
    }
    let bn = b.norm();
    if bn == 0.0 {
        return Ok(0.0);
    }
    // Integrate in s = ln ρ, where the integrand is smooth apart from the envelope kinks.
    let integrand = |s: f64| {
        let rho = s.exp();
        mg.envelope(eps * bn / (2.0 * PI * rho)) * rho * rho
    };
    let (t1, t2) = mg.tangency();
    let mut breaks = vec![inner.ln(), outer.ln()];
    for tk in [t1, t2] {
        let rho = eps * bn / (2.0 * PI * tk);
        if rho > inner && rho < outer {
            breaks.push(rho.ln());
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut total = 0.0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            total += integrate_adaptive(integrand, w[0], w[1], 1e-12)?;
        }
    }
    Ok(h * total)
}

/// Least-squares fit of `value = ψ∞ - κ / ln(R/r)`; returns `(ψ∞, κ)`.
pub fn richardson_limit(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument("need at least two points".into()));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|(lr, _)| 1.0 / lr).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = points.iter().map(|(_, v)| v).sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(points).map(|(x, (_, v))| (x - mx) * (v - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("need distinct radii".into()));
    }
    let slope = sxy / sxx;
    Ok((my - slope * mx, -slope))
}
