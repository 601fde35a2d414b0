//! Periodic spectral solver for `curl β = μ`, `div Cβ = 0`, and tools on
//! the resulting strain fields.
//!
//! Fields are expanded as `β(x) = Σ_k β̂(k) e^{ik·x}` with
//! `β̂(k) = V⁻¹ ∫ β e^{-ik·x}`; only the half spectrum `k₃ >= 0` is stored.

mod fft;
mod mollifier;
mod spatial;

pub use mollifier::{mollify, Mollifier, MollifierKind};
pub use spatial::{
    annulus_energy, concentration, concentration_in, fit_rotation, periodic_distance, recovery_field,
    recovery_field_linear, RotationFit, SpatialField,
};

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use num_complex::Complex64;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use crate::elasticity::ElasticTensor;
use crate::error::{Error, Result};
use crate::network::PolyhedralCurrent;
use fft::Fft3;

pub type CMatrix3 = Matrix3<Complex64>;
pub type CVector3 = Vector3<Complex64>;

/// Cube `[0, L)³` with `n` samples per side at `x = L·idx/n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicBox {
    #[serde(rename = "L")]
    pub l: f64,
    pub n: usize,
}

impl PeriodicBox {
    pub fn new(l: f64, n: usize) -> Result<Self> {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::InvalidArgument(format!("box side must be positive, got {l}")));
        }
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidArgument(format!("grid count must be a power of two >= 16, got {n}")));
        }
        Ok(Self { l, n })
    }

    pub fn spacing(&self) -> f64 {
        self.l / self.n as f64
    }

    pub fn volume(&self) -> f64 {
        self.l * self.l * self.l
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    pub fn half(&self) -> usize {
        self.n / 2 + 1
    }

    pub fn spectrum_len(&self) -> usize {
        self.n * self.n * self.half()
    }

    /// Signed frequency of FFT index `i`.
    #[inline]
    pub fn wave(&self, i: usize) -> i64 {
        if i <= self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    #[inline]
    pub fn mode_index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.half() + k
    }

    /// `(i, j, k₃)` of a half-spectrum index.
    #[inline]
    pub fn mode_coords(&self, idx: usize) -> (usize, usize, usize) {
        let h = self.half();
        (idx / (self.n * h), (idx / h) % self.n, idx % h)
    }

    pub fn integer_wave(&self, idx: usize) -> [i64; 3] {
        let (i, j, k) = self.mode_coords(idx);
        [self.wave(i), self.wave(j), k as i64]
    }

    pub fn wavevector(&self, idx: usize) -> Vector3<f64> {
        let m = self.integer_wave(idx);
        let f = 2.0 * std::f64::consts::PI / self.l;
        Vector3::new(m[0] as f64 * f, m[1] as f64 * f, m[2] as f64 * f)
    }

    /// Modes with a Nyquist component are zeroed by every operation.
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let half = (self.n / 2) as i64;
        self.integer_wave(idx).iter().any(|m| m.abs() == half)
    }

    /// Multiplicity of a half-spectrum mode in the full spectrum.
    fn weight(&self, idx: usize) -> f64 {
        let (_, _, k) = self.mode_coords(idx);
        if k == 0 || k == self.n / 2 {
            1.0
        } else {
            2.0
        }
    }

    #[inline]
    pub fn node_index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    pub fn position(&self, idx: usize) -> Vector3<f64> {
        let n = self.n;
        let h = self.spacing();
        Vector3::new((idx / (n * n)) as f64 * h, ((idx / n) % n) as f64 * h, (idx % n) as f64 * h)
    }
}

/// Half spectrum of a periodic 3x3-matrix field.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub grid: PeriodicBox,
    pub modes: Vec<CMatrix3>,
}

/// Spectrum of a strain solving `curl β = μ`, `div Cβ = 0`.
pub type FourierStrain = Spectrum;

#[inline]
fn cmat_zero() -> CMatrix3 {
    Matrix3::from_element(Complex64::new(0.0, 0.0))
}

/// `C` applied to a complex matrix.
pub fn apply_complex(c: &ElasticTensor, a: &CMatrix3) -> CMatrix3 {
    let re = c.apply(&a.map(|z| z.re));
    let im = c.apply(&a.map(|z| z.im));
    Matrix3::from_fn(|i, j| Complex64::new(re[(i, j)], im[(i, j)]))
}

/// `k × v` for a real `k` and complex `v`.
fn cross_k(k: &Vector3<f64>, v: &CVector3) -> CVector3 {
    Vector3::new(
        v[2] * k[1] - v[1] * k[2],
        v[0] * k[2] - v[2] * k[0],
        v[1] * k[0] - v[0] * k[1],
    )
}

/// Rowwise `ik × β̂_i`, the Fourier symbol of the row-wise curl.
pub fn curl_symbol(k: &Vector3<f64>, beta: &CMatrix3) -> CMatrix3 {
    let i = Complex64::new(0.0, 1.0);
    let mut out = cmat_zero();
    for r in 0..3 {
        let row = Vector3::new(beta[(r, 0)], beta[(r, 1)], beta[(r, 2)]);
        let kx = cross_k(k, &row);
        for c in 0..3 {
            out[(r, c)] = i * kx[c];
        }
    }
    out
}

fn times_real_vec(m: &CMatrix3, k: &Vector3<f64>) -> CVector3 {
    Vector3::from_fn(|r, _| m[(r, 0)] * k[0] + m[(r, 1)] * k[1] + m[(r, 2)] * k[2])
}

impl Spectrum {
    pub fn zeros(grid: PeriodicBox) -> Self {
        Self {
            grid,
            modes: vec![cmat_zero(); grid.spectrum_len()],
        }
    }

    pub fn add(&self, other: &Spectrum) -> Result<Spectrum> {
        if self.grid != other.grid {
            return Err(Error::Shape("spectra on different boxes".into()));
        }
        Ok(Spectrum {
            grid: self.grid,
            modes: self.modes.iter().zip(&other.modes).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn scaled(&self, s: f64) -> Spectrum {
        Spectrum {
            grid: self.grid,
            modes: self.modes.iter().map(|a| a * Complex64::new(s, 0.0)).collect(),
        }
    }

    pub fn max_norm(&self) -> f64 {
        self.modes.iter().map(|m| m.norm()).fold(0.0, f64::max)
    }

    /// `∫ ½ Cβ·β` over the box (Parseval).
    pub fn energy(&self, c: &ElasticTensor) -> f64 {
        let mut e = 0.0;
        for (idx, m) in self.modes.iter().enumerate() {
            let cm = apply_complex(c, m);
            let mut s = 0.0;
            for a in 0..9 {
                s += (cm[a] * m[a].conj()).re;
            }
            e += self.grid.weight(idx) * 0.5 * s;
        }
        e * self.grid.volume()
    }

    /// Real-space samples on the box grid.
    pub fn to_spatial(&self) -> SpatialField {
        let g = self.grid;
        let n = g.n;
        let total = n * n * n;
        let fft = Fft3::new(n, FftDirection::Inverse);
        let mut data = vec![Matrix3::zeros(); total];
        let mut buf = vec![Complex64::default(); total];
        let mut max_imag = 0.0f64;
        let mut max_real = 0.0f64;
        for comp in 0..9 {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let v = if k <= n / 2 {
                            self.modes[g.mode_index(i, j, k)][comp]
                        } else {
                            self.modes[g.mode_index((n - i) % n, (n - j) % n, n - k)][comp].conj()
                        };
                        buf[g.node_index(i, j, k)] = v;
                    }
                }
            }
            fft.process(&mut buf);
            for (d, v) in data.iter_mut().zip(&buf) {
                d[comp] = v.re;
                max_imag = max_imag.max(v.im.abs());
                max_real = max_real.max(v.re.abs());
            }
        }
        SpatialField {
            grid: g,
            data,
            max_imag: if max_real > 0.0 { max_imag / max_real } else { max_imag },
        }
    }

    /// Half spectrum of real samples.
    pub fn from_spatial(field: &SpatialField) -> Spectrum {
        let g = field.grid;
        let n = g.n;
        let total = n * n * n;
        let fft = Fft3::new(n, FftDirection::Forward);
        let mut out = Spectrum::zeros(g);
        let mut buf = vec![Complex64::default(); total];
        let scale = 1.0 / total as f64;
        for comp in 0..9 {
            for (b, d) in buf.iter_mut().zip(&field.data) {
                *b = Complex64::new(d[comp], 0.0);
            }
            fft.process(&mut buf);
            for i in 0..n {
                for j in 0..n {
                    for k in 0..g.half() {
                        out.modes[g.mode_index(i, j, k)][comp] = buf[g.node_index(i, j, k)] * scale;
                    }
                }
            }
        }
        out
    }

    /// `max_k |ik × β̂_rows(k)| / |k|`, relative to `max |β̂|` (Nyquist modes excluded).
    pub fn curl_residual(&self) -> f64 {
        let scale = self.max_norm().max(f64::MIN_POSITIVE);
        self.modes
            .iter()
            .enumerate()
            .filter(|(idx, _)| !self.grid.is_nyquist(*idx))
            .map(|(idx, m)| {
                let k = self.grid.wavevector(idx);
                let kn = k.norm();
                if kn == 0.0 {
                    0.0
                } else {
                    curl_symbol(&k, m).norm() / kn
                }
            })
            .fold(0.0, f64::max)
            / scale
    }
}

/// Exact Fourier coefficients of `Σ θ_i ⊗ τ_i H¹⌞γ_i`.
pub fn mu_hat(current: &PolyhedralCurrent, grid: PeriodicBox) -> Result<Spectrum> {
    let mut out = Spectrum::zeros(grid);
    let inv_v = 1.0 / grid.volume();
    let segs: Vec<_> = (0..current.segments.len())
        .map(|s| {
            let (a, b) = current.endpoints(s);
            let len = (b - a).norm();
            let tau = (b - a) / len;
            (current.segments[s].theta * tau.transpose() * (len * inv_v), (a + b) * 0.5, tau, len)
        })
        .collect();
    let mut max_norm = 0.0f64;
    for idx in 0..out.modes.len() {
        if grid.is_nyquist(idx) {
            continue;
        }
        let k = grid.wavevector(idx);
        let mut m = cmat_zero();
        for (mat, mid, tau, len) in &segs {
            let x = k.dot(tau) * len * 0.5;
            let sinc = if x.abs() < 1e-8 { 1.0 - x * x / 6.0 } else { x.sin() / x };
            let phase = Complex64::from_polar(sinc, -k.dot(mid));
            m += mat.map(|v| phase * v);
        }
        max_norm = max_norm.max(m.norm());
        out.modes[idx] = m;
    }
    // Discrete Div μ = 0: every row orthogonal to k.
    let tol = 1e-8 * max_norm.max(f64::MIN_POSITIVE);
    for (idx, m) in out.modes.iter().enumerate() {
        let k = grid.wavevector(idx);
        let kn = k.norm();
        if kn == 0.0 {
            continue;
        }
        let d = times_real_vec(m, &k).norm() / kn;
        if d > tol {
            return Err(Error::NotDivergenceFree(format!(
                "mode {:?}: |μ̂ k|/|k| = {d:e} (open endpoints inside the periodic box?)",
                grid.integer_wave(idx)
            )));
        }
    }
    Ok(out)
}

/// Solves `curl β = μ`, `div Cβ = 0` mode by mode; `β̂(0) = 0`.
pub fn solve_periodic(c: &ElasticTensor, mu: &Spectrum) -> Result<FourierStrain> {
    c.ensure_admissible()?;
    let grid = mu.grid;
    let mut out = Spectrum::zeros(grid);
    let i = Complex64::new(0.0, 1.0);
    // The acoustic tensor is 2-homogeneous in k, so its conditioning only
    // depends on the direction; cache by reduced integer direction.
    let mut cond_cache = std::collections::HashMap::new();
    for idx in 0..mu.modes.len() {
        let m = &mu.modes[idx];
        if grid.is_nyquist(idx) || m.iter().all(|z| z.norm_sqr() == 0.0) {
            continue;
        }
        let k = grid.wavevector(idx);
        let k2 = k.norm_squared();
        if k2 == 0.0 {
            continue;
        }
        let mut bp = cmat_zero();
        for r in 0..3 {
            let row = Vector3::new(m[(r, 0)], m[(r, 1)], m[(r, 2)]);
            let kx = cross_k(&k, &row);
            for col in 0..3 {
                bp[(r, col)] = i * kx[col] / k2;
            }
        }
        let a = c.contract(&k, &k);
        let w = integer_direction(grid.integer_wave(idx));
        let cond = *cond_cache.entry(w).or_insert_with(|| {
            let e = SymmetricEigen::new(a).eigenvalues;
            let (lo, hi) = (e.min(), e.max());
            if lo > 0.0 {
                hi / lo
            } else {
                f64::INFINITY
            }
        });
        if cond > 1e12 {
            return Err(Error::IllConditioned {
                mode: grid.integer_wave(idx),
                condition: cond,
            });
        }
        let ainv = a.try_inverse().ok_or_else(|| Error::Singular("acoustic tensor".into()))?;
        let rhs = times_real_vec(&apply_complex(c, &bp), &k) * i;
        let u: CVector3 = Vector3::from_fn(|r, _| {
            (0..3).fold(Complex64::default(), |acc, s| acc + rhs[s] * ainv[(r, s)])
        });
        for r in 0..3 {
            for col in 0..3 {
                bp[(r, col)] += u[r] * i * k[col];
            }
        }
        out.modes[idx] = bp;
    }
    Ok(out)
}

fn integer_direction(m: [i64; 3]) -> [i64; 3] {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }
    let g = gcd(gcd(m[0], m[1]), m[2]).max(1);
    [m[0] / g, m[1] / g, m[2] / g]
}

/// Per-mode residuals of the two equations, maximized over non-Nyquist modes.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ModeResiduals {
    /// `max |ik × β̂ - μ̂| / max |μ̂|`.
    pub curl: f64,
    /// `max |Cβ̂ k| / (|k| max |Cβ̂|)`.
    pub divergence: f64,
}

pub fn residuals(c: &ElasticTensor, beta: &FourierStrain, mu: &Spectrum) -> ModeResiduals {
    let grid = beta.grid;
    let mu_scale = mu.max_norm().max(f64::MIN_POSITIVE);
    let mut curl = 0.0f64;
    let mut div = 0.0f64;
    let mut stress_scale = f64::MIN_POSITIVE;
    let mut div_raw = Vec::new();
    for idx in 0..beta.modes.len() {
        if grid.is_nyquist(idx) {
            continue;
        }
        let k = grid.wavevector(idx);
        let kn = k.norm();
        if kn == 0.0 {
            continue;
        }
        let cb = apply_complex(c, &beta.modes[idx]);
        stress_scale = stress_scale.max(cb.norm());
        curl = curl.max((curl_symbol(&k, &beta.modes[idx]) - mu.modes[idx]).norm() / mu_scale);
        div_raw.push(times_real_vec(&cb, &k).norm() / kn);
    }
    for d in div_raw {
        div = div.max(d / stress_scale);
    }
    ModeResiduals { curl, divergence: div }
}

#[cfg(test)]
mod tests;
