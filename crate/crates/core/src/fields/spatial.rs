use nalgebra::{Matrix3, Vector3};

use super::{PeriodicBox, Spectrum};
use crate::elasticity::{dist_so3, ElasticTensor, MixedGrowth};
use crate::error::{Error, Result};
use crate::geometry::{point_segment_distance, AxisBox, Rotation};
use crate::network::PolyhedralCurrent;

/// Real 3x3 samples at the nodes `x = L·idx/n` of a periodic box, `k` fastest.
#[derive(Clone, Debug)]
pub struct SpatialField {
    pub grid: PeriodicBox,
    pub data: Vec<Matrix3<f64>>,
    /// Largest imaginary part seen by the inverse transform, relative to the
    /// largest real part (zero for fields built in real space).
    pub max_imag: f64,
}

impl SpatialField {
    pub fn constant(grid: PeriodicBox, value: Matrix3<f64>) -> Self {
        Self {
            grid,
            data: vec![value; grid.n * grid.n * grid.n],
            max_imag: 0.0,
        }
    }

    pub fn from_fn(grid: PeriodicBox, f: impl Fn(&Vector3<f64>) -> Matrix3<f64>) -> Self {
        let total = grid.n * grid.n * grid.n;
        Self {
            grid,
            data: (0..total).map(|i| f(&grid.position(i))).collect(),
            max_imag: 0.0,
        }
    }

    fn ensure_same_grid(&self, other: &SpatialField) -> Result<()> {
        if self.grid != other.grid || self.data.len() != other.data.len() {
            return Err(Error::Shape(format!(
                "fields sampled on different grids ({:?} vs {:?})",
                self.grid, other.grid
            )));
        }
        Ok(())
    }

    /// `∫ ½ Cβ·β` by the node rule.
    pub fn energy(&self, c: &ElasticTensor) -> f64 {
        self.data.iter().map(|b| c.energy_density(b)).sum::<f64>() * self.grid.cell_volume()
    }
}

/// Distance from `x` to the curve, minimized over the 27 nearest periodic images.
///
/// Exact as long as the curve lies within one period of the box.
pub fn periodic_distance(gamma: &PolyhedralCurrent, x: &Vector3<f64>, l: f64) -> f64 {
    let mut best = f64::INFINITY;
    for s in 0..gamma.segments.len() {
        let (a, b) = gamma.endpoints(s);
        for i in -1..=1 {
            for j in -1..=1 {
                for k in -1..=1 {
                    let shift = Vector3::new(i as f64, j as f64, k as f64) * l;
                    best = best.min(point_segment_distance(&(x + shift), &a, &b));
                }
            }
        }
    }
    best
}

fn check_core(grid: &PeriodicBox, eps: f64) -> Result<()> {
    if !(eps >= 2.0 * grid.spacing() * (1.0 - 1e-12)) {
        return Err(Error::InvalidArgument(format!(
            "core radius {eps} is thinner than two grid spacings ({})",
            2.0 * grid.spacing()
        )));
    }
    if !(eps < 1.0) {
        return Err(Error::InvalidArgument(format!("core radius must be below 1 for ln(1/ε) > 0, got {eps}")));
    }
    Ok(())
}

fn masked_energy(beta: &SpatialField, c: &ElasticTensor, keep: impl Fn(usize) -> bool) -> f64 {
    let dv = beta.grid.cell_volume();
    beta.data
        .iter()
        .enumerate()
        .filter(|(i, _)| keep(*i))
        .map(|(_, b)| c.energy_density(b))
        .sum::<f64>()
        * dv
}

/// `ν_ε` of the box: `(1/ln(1/ε)) Σ ½Cβ·β vol` over nodes with `dist(x, γ) >= ε`.
pub fn concentration(beta: &SpatialField, gamma: &PolyhedralCurrent, eps: f64, c: &ElasticTensor) -> Result<f64> {
    check_core(&beta.grid, eps)?;
    let g = beta.grid;
    let e = masked_energy(beta, c, |i| periodic_distance(gamma, &g.position(i), g.l) >= eps);
    Ok(e / (1.0 / eps).ln())
}

/// [`concentration`] restricted to nodes inside `region` (closed box).
pub fn concentration_in(
    beta: &SpatialField,
    gamma: &PolyhedralCurrent,
    eps: f64,
    c: &ElasticTensor,
    region: &AxisBox,
) -> Result<f64> {
    check_core(&beta.grid, eps)?;
    let g = beta.grid;
    let e = masked_energy(beta, c, |i| {
        let x = g.position(i);
        region.contains_open(&x, -1e-12) && periodic_distance(gamma, &x, g.l) >= eps
    });
    Ok(e / (1.0 / eps).ln())
}

/// Unnormalized energy over nodes with `inner <= dist(x, γ) < outer`.
pub fn annulus_energy(
    beta: &SpatialField,
    gamma: &PolyhedralCurrent,
    inner: f64,
    outer: f64,
    c: &ElasticTensor,
) -> Result<f64> {
    if !(inner >= 0.0 && outer > inner) {
        return Err(Error::InvalidArgument(format!("annulus needs 0 <= inner < outer, got [{inner}, {outer})")));
    }
    let g = beta.grid;
    Ok(masked_energy(beta, c, |i| {
        let d = periodic_distance(gamma, &g.position(i), g.l);
        d >= inner && d < outer
    }))
}

fn check_curl_free(eta: &SpatialField) -> Result<()> {
    let r = Spectrum::from_spatial(eta).curl_residual();
    if r > 1e-8 {
        return Err(Error::InvalidArgument(format!("η is not curl-free (spectral residual {r:e})")));
    }
    Ok(())
}

/// `β = Q + ε ln^{1/2}(1/ε) Qη + ε Qξ`.
pub fn recovery_field(q: &Rotation<f64>, eta: &SpatialField, xi: &SpatialField, eps: f64) -> Result<SpatialField> {
    eta.ensure_same_grid(xi)?;
    check_curl_free(eta)?;
    let q = *q.matrix();
    let a = eps * (1.0 / eps).ln().sqrt();
    Ok(SpatialField {
        grid: eta.grid,
        data: eta.data.iter().zip(&xi.data).map(|(e, x)| q + q * e * a + q * x * eps).collect(),
        max_imag: 0.0,
    })
}

/// Linearized recovery strain `ε ln^{1/2}(1/ε) η + ε ξ`.
pub fn recovery_field_linear(eta: &SpatialField, xi: &SpatialField, eps: f64) -> Result<SpatialField> {
    eta.ensure_same_grid(xi)?;
    check_curl_free(eta)?;
    let a = eps * (1.0 / eps).ln().sqrt();
    Ok(SpatialField {
        grid: eta.grid,
        data: eta.data.iter().zip(&xi.data).map(|(e, x)| e * a + x * eps).collect(),
        max_imag: 0.0,
    })
}

#[derive(Clone, Debug)]
pub struct RotationFit {
    pub rotation: Rotation<f64>,
    /// `∫ Φ_p(|β - Q|) / ∫ Φ_p(dist(β, SO(3)))` over the region; 1 when both vanish.
    pub residual: f64,
}

/// Rotation factor of the polar decomposition of the region average of `β`.
pub fn fit_rotation(beta: &SpatialField, mask: &[bool], mg: &MixedGrowth<f64>) -> Result<RotationFit> {
    if mask.len() != beta.data.len() {
        return Err(Error::Shape(format!("mask has {} entries for {} samples", mask.len(), beta.data.len())));
    }
    let selected: Vec<&Matrix3<f64>> = beta.data.iter().zip(mask).filter(|(_, m)| **m).map(|(b, _)| b).collect();
    if selected.is_empty() {
        return Err(Error::InvalidArgument("empty region".into()));
    }
    let avg = selected.iter().copied().sum::<Matrix3<f64>>() / selected.len() as f64;
    let det = avg.determinant();
    let svd = avg.svd(true, true);
    let (smax, smin) = (svd.singular_values.max(), svd.singular_values.min());
    if !(smin > 1e-12 * smax) {
        return Err(Error::Singular(format!("region average has singular values {}", svd.singular_values)));
    }
    if det < 0.0 {
        return Err(Error::Singular(format!("region average has negative determinant {det}")));
    }
    let (u, vt) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let rotation = Rotation::new(u * vt)?;
    let r = *rotation.matrix();
    let num: f64 = selected.iter().map(|b| mg.phi((*b - r).norm())).sum();
    let den: f64 = selected.iter().map(|b| mg.phi(dist_so3(*b))).sum();
    let residual = if den > 0.0 {
        num / den
    } else if num == 0.0 {
        1.0
    } else {
        f64::INFINITY
    };
    Ok(RotationFit { rotation, residual })
}
