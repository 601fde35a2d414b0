use nalgebra::{Matrix3, Vector3};

use super::PolyhedralCurrent;
use crate::geometry::AxisBox;
use crate::quadrature::gauss_legendre;

/// Panel of tensor-product bump functions `φ(x) = Π_d b((x_d - c_d)/r)`
/// with `b(s) = exp(1 - 1/(1 - s²))` on `|s| < 1`, centered on an `m³` grid
/// of the box interior with radius equal to the grid spacing.
#[derive(Clone, Debug)]
pub struct TestPanel {
    pub centers: Vec<Vector3<f64>>,
    pub radius: f64,
}

fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

/// `max |b'|`, attained at `s ≈ ±0.5`; evaluated on a fine grid.
fn bump_lipschitz() -> f64 {
    let n = 20_000;
    (1..n)
        .map(|i| {
            let s = -1.0 + 2.0 * i as f64 / n as f64;
            let d = 2.0 * s / (1.0 - s * s).powi(2);
            (d * bump(s)).abs()
        })
        .fold(0.0, f64::max)
}

impl TestPanel {
    pub fn grid(omega: &AxisBox, m: usize) -> Self {
        assert!(m >= 1);
        let side = (0..3).map(|d| omega.max[d] - omega.min[d]).fold(f64::INFINITY, f64::min);
        let radius = side / (m as f64 + 1.0);
        let mut centers = Vec::with_capacity(m * m * m);
        for i in 1..=m {
            for j in 1..=m {
                for k in 1..=m {
                    let idx = [i, j, k];
                    centers.push(Vector3::from_fn(|d, _| {
                        omega.min[d] + (omega.max[d] - omega.min[d]) * idx[d] as f64 / (m as f64 + 1.0)
                    }));
                }
            }
        }
        Self { centers, radius }
    }

    pub fn eval(&self, n: usize, x: &Vector3<f64>) -> f64 {
        let c = self.centers[n];
        (0..3).map(|d| bump((x[d] - c[d]) / self.radius)).product()
    }

    /// Upper bound on the Lipschitz constant of every panel function.
    pub fn lipschitz(&self) -> f64 {
        3f64.sqrt() * bump_lipschitz() / self.radius
    }

    /// `⟨μ, φ_n⟩ = Σ_i θ_i ⊗ τ_i ∫_{γ_i} φ_n dH¹`.
    pub fn pair(&self, n: usize, current: &PolyhedralCurrent) -> Matrix3<f64> {
        let (x, w) = gauss_legendre(8);
        let pieces = 64;
        let mut total = Matrix3::zeros();
        for (s, seg) in current.segments.iter().enumerate() {
            let (a, b) = current.endpoints(s);
            let len = (b - a).norm();
            let mut integral = 0.0;
            for p in 0..pieces {
                let lo = p as f64 / pieces as f64;
                let half = 0.5 / pieces as f64;
                for (xi, wi) in x.iter().zip(&w) {
                    let u = lo + half * (1.0 + xi);
                    integral += wi * half * self.eval(n, &(a + (b - a) * u));
                }
            }
            total += seg.theta * ((b - a) / len).transpose() * (integral * len);
        }
        total
    }
}

impl PolyhedralCurrent {
    /// `max_n |⟨μ_ε/ε - μ, φ_n⟩|` (Frobenius norm) over the panel.
    pub fn weak_star_gap(&self, limit: &PolyhedralCurrent, panel: &TestPanel) -> f64 {
        let inv = 1.0 / self.eps;
        (0..panel.centers.len())
            .map(|n| (panel.pair(n, self) * inv - panel.pair(n, limit)).norm())
            .fold(0.0, f64::max)
    }
}
