use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Spectrum;
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre_on;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MollifierKind {
    /// `exp(-1/(1 - |x|²))` on the unit ball.
    Bump,
    /// `exp(-9|x|²/2)` (σ = 1/3) cut off at `|x| = 1`.
    GaussianTruncated,
}

impl MollifierKind {
    fn profile(&self, r: f64) -> f64 {
        if r >= 1.0 {
            return 0.0;
        }
        match self {
            MollifierKind::Bump => (-1.0 / (1.0 - r * r)).exp(),
            MollifierKind::GaussianTruncated => (-4.5 * r * r).exp(),
        }
    }
}

/// Table of the radial Fourier transform `φ̂(q)` of a unit-mass mollifier,
/// with its derivative, for cubic Hermite interpolation.
#[derive(Clone, Debug)]
pub struct Mollifier {
    pub kind: MollifierKind,
    dq: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

const PANELS: usize = 64;
const POINTS: usize = 12;

/// Radial quadrature of `4π ∫ φ(r) r² j0(qr) dr` on `[0, 1]`.
struct RadialRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    mass: f64,
}

impl RadialRule {
    fn new(kind: MollifierKind) -> Self {
        let mut nodes = Vec::with_capacity(PANELS * POINTS);
        let mut weights = Vec::with_capacity(PANELS * POINTS);
        for p in 0..PANELS {
            let (x, w) = gauss_legendre_on(POINTS, p as f64 / PANELS as f64, (p + 1) as f64 / PANELS as f64);
            nodes.extend(x);
            weights.extend(w);
        }
        for (r, w) in nodes.iter().zip(weights.iter_mut()) {
            *w *= 4.0 * PI * kind.profile(*r) * r * r;
        }
        let mass = weights.iter().sum();
        Self { nodes, weights, mass }
    }

    /// `(φ̂(q), φ̂'(q))`.
    fn transform(&self, q: f64) -> (f64, f64) {
        let (mut v, mut s) = (0.0, 0.0);
        for (r, w) in self.nodes.iter().zip(&self.weights) {
            let x = q * r;
            let (j0, dj0) = if x < 1e-4 {
                (1.0 - x * x / 6.0, -x / 3.0)
            } else {
                (x.sin() / x, (x * x.cos() - x.sin()) / (x * x))
            };
            v += w * j0;
            s += w * r * dj0;
        }
        (v / self.mass, s / self.mass)
    }
}

impl Mollifier {
    /// Tabulates `φ̂` on `[0, q_max]`.
    pub fn new(kind: MollifierKind, q_max: f64) -> Self {
        let dq = 0.02;
        let count = (q_max / dq).ceil() as usize + 2;
        let rule = RadialRule::new(kind);
        let (values, slopes) = (0..count).map(|i| rule.transform(i as f64 * dq)).unzip();
        Self {
            kind,
            dq,
            values,
            slopes,
        }
    }

    pub fn q_max(&self) -> f64 {
        (self.values.len() - 2) as f64 * self.dq
    }

    /// `φ̂(q)` for `q = |ξ|`.
    pub fn eval(&self, q: f64) -> Result<f64> {
        if !(q >= 0.0) || q > self.q_max() {
            return Err(Error::InvalidArgument(format!(
                "mollifier table covers |ξ| <= {}, requested {q}",
                self.q_max()
            )));
        }
        let i = (q / self.dq).floor() as usize;
        let t = q / self.dq - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * self.dq, self.slopes[i + 1] * self.dq);
        let t2 = t * t;
        let t3 = t2 * t;
        Ok((2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1)
    }
}

/// Multiplies every mode by `φ̂(ε|k|)`.
pub fn mollify(mu: &Spectrum, eps: f64, mollifier: &Mollifier) -> Result<Spectrum> {
    let grid = mu.grid;
    if !(eps > 0.0 && eps < grid.l / 4.0) {
        return Err(Error::InvalidArgument(format!(
            "mollification radius must lie in (0, L/4), got {eps}"
        )));
    }
    let mut out = mu.clone();
    for (idx, m) in out.modes.iter_mut().enumerate() {
        if grid.is_nyquist(idx) {
            continue;
        }
        let f = mollifier.eval(eps * grid.wavevector(idx).norm())?;
        *m *= Complex64::new(f, 0.0);
    }
    Ok(out)
}
