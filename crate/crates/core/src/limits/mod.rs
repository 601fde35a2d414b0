//! Regularized energies `F_ε`, the limit functional and ε-sweeps.
//!
//! Currents passed here carry unit-lattice multiplicities `θ ∈ B`; the
//! admissible measure at lattice spacing `ε` is `εμ`, so every strain field
//! checked below must satisfy `curl β = εμ` (or its mollification).

mod table;

pub use table::{gamma_table, EtaSpec, GammaConfig, GammaTable, PlaneWave, RhoRule, TableSummary};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::elasticity::{ElasticTensor, Kinematics, MixedGrowth};
use crate::error::{Error, Result};
use crate::fields::{curl_symbol, mollify, mu_hat, periodic_distance, Mollifier, SpatialField, Spectrum};
use crate::geometry::{AxisBox, Rotation};
use crate::linetension::{psi, ProfileOptions};
use crate::network::{BravaisLattice, PolyhedralCurrent};
use crate::relaxation::{psi_rel_upper, Caps, GraphOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    SubcriticalMixedGrowth,
    CoreCutoff,
    Mollified,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::SubcriticalMixedGrowth, Variant::CoreCutoff, Variant::Mollified];

    pub fn name(&self) -> &'static str {
        match self {
            Variant::SubcriticalMixedGrowth => "subcritical-mixed-growth",
            Variant::CoreCutoff => "core-cutoff",
            Variant::Mollified => "mollified",
        }
    }
}

/// Diluteness parameters `h_ε = ln(1/ε)^{-h_power}`, `α_ε = ln(1/ε)^{-alpha_power}`.
///
/// Any positive powers give `h_ε, α_ε → 0` with `ln(1/(α_ε h_ε)) / ln(1/ε) → 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub h_power: f64,
    pub alpha_power: f64,
}

impl Default for Schedule {
    fn default() -> Self {
        Self {
            h_power: 0.5,
            alpha_power: 0.5,
        }
    }
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.h_power > 0.0 && self.alpha_power > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "diluteness powers must be positive, got h {} and alpha {}",
                self.h_power, self.alpha_power
            )));
        }
        Ok(())
    }

    /// `(h_ε, α_ε)`.
    pub fn at(&self, eps: f64) -> (f64, f64) {
        let l = (1.0 / eps).ln();
        (l.powf(-self.h_power), l.powf(-self.alpha_power))
    }
}

/// One evaluation of a regularized energy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub variant: Variant,
    pub eps: f64,
    /// Core radius; only set for the core-cutoff variant.
    pub rho_eps: Option<f64>,
    /// `∫ W(β)` over the variant's domain.
    pub raw: f64,
    /// `raw / (ε² ln(1/ε))`.
    pub rescaled: f64,
    /// Relative spectral residual of the admissibility constraint.
    pub curl_residual: f64,
    pub h_eps: f64,
    pub alpha_eps: f64,
    pub dilute: bool,
    pub limit: Option<f64>,
    /// `|rescaled - limit| / limit`, or the absolute difference when the limit vanishes.
    pub gap: Option<f64>,
}

impl EnergyReport {
    pub fn with_limit(mut self, limit: f64) -> Self {
        let d = (self.rescaled - limit).abs();
        self.limit = Some(limit);
        self.gap = Some(if limit > 0.0 { d / limit } else { d });
        self
    }
}

fn check_eps(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < (-1.0f64).exp()) {
        return Err(Error::InvalidArgument(format!("ε must lie in (0, 1/e), got {eps}")));
    }
    Ok(eps * eps * (1.0 / eps).ln())
}

/// `max_k |ik × β̂(k) - target(k)|` relative to the size of both sides.
///
/// The mean `k = 0` is skipped: a periodic field has no net curl, so the mean
/// of the measure is carried by a uniform background.
pub fn constraint_residual(beta: &SpatialField, target: &Spectrum) -> Result<f64> {
    if beta.grid != target.grid {
        return Err(Error::Shape("field and measure live on different boxes".into()));
    }
    let bh = Spectrum::from_spatial(beta);
    let grid = beta.grid;
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for idx in 0..bh.modes.len() {
        let k = grid.wavevector(idx);
        if grid.is_nyquist(idx) || k.norm() == 0.0 {
            continue;
        }
        let curl = curl_symbol(&k, &bh.modes[idx]);
        worst = worst.max((curl - target.modes[idx]).norm());
        scale = scale.max(target.modes[idx].norm()).max(k.norm() * bh.modes[idx].norm());
    }
    Ok(if scale > 0.0 { worst / scale } else { 0.0 })
}

fn check_admissible(beta: &SpatialField, target: &Spectrum) -> Result<f64> {
    let r = constraint_residual(beta, target)?;
    if r > 1e-6 {
        return Err(Error::NotAdmissible(format!("curl β differs from the measure (relative residual {r:e})")));
    }
    Ok(r)
}

/// Pointwise `W(β)` at the nodes.
pub fn densities(beta: &SpatialField, mg: &MixedGrowth, kinematics: Kinematics) -> Vec<f64> {
    beta.data.iter().map(|b| kinematics.density(b, mg)).collect()
}

fn dilution(mu: &PolyhedralCurrent, l: f64, eps: f64, schedule: &Schedule) -> Result<(f64, f64, bool)> {
    schedule.validate()?;
    let (h, alpha) = schedule.at(eps);
    let omega = AxisBox::new([0.0; 3], [l; 3])?;
    Ok((h, alpha, mu.check_dilute(h, alpha, &omega).dilute))
}

/// Nodes outside the `rho`-neighbourhood of the curve.
pub fn core_mask(beta: &SpatialField, mu: &PolyhedralCurrent, rho: f64) -> Vec<bool> {
    let g = beta.grid;
    (0..beta.data.len()).map(|i| periodic_distance(mu, &g.position(i), g.l) >= rho).collect()
}

fn check_rho(beta: &SpatialField, eps: f64, rho: f64) -> Result<()> {
    if !(rho >= eps) {
        return Err(Error::InvalidArgument(format!("core radius {rho} is below ε = {eps}")));
    }
    if !(rho >= 2.0 * beta.grid.spacing() * (1.0 - 1e-12)) {
        return Err(Error::InvalidArgument(format!(
            "core radius {rho} is thinner than two grid spacings ({})",
            2.0 * beta.grid.spacing()
        )));
    }
    Ok(())
}

struct Evaluation<'a> {
    beta: &'a SpatialField,
    mu: &'a PolyhedralCurrent,
    eps: f64,
    schedule: &'a Schedule,
}

impl Evaluation<'_> {
    fn report(&self, variant: Variant, w: &[f64], mask: Option<&[bool]>, rho: Option<f64>, residual: f64) -> Result<EnergyReport> {
        let norm = check_eps(self.eps)?;
        let dv = self.beta.grid.cell_volume();
        let raw = match mask {
            None => w.iter().sum::<f64>() * dv,
            Some(m) => w.iter().zip(m).filter(|(_, keep)| **keep).map(|(x, _)| x).sum::<f64>() * dv,
        };
        let (h_eps, alpha_eps, dilute) = dilution(self.mu, self.beta.grid.l, self.eps, self.schedule)?;
        Ok(EnergyReport {
            variant,
            eps: self.eps,
            rho_eps: rho,
            raw,
            rescaled: raw / norm,
            curl_residual: residual,
            h_eps,
            alpha_eps,
            dilute,
            limit: None,
            gap: None,
        })
    }

    fn target(&self) -> Result<Spectrum> {
        Ok(mu_hat(self.mu, self.beta.grid)?.scaled(self.eps))
    }
}

/// `F_ε[β, Ω]` for `curl β = εμ`.
pub fn f_eps_subcr(
    beta: &SpatialField,
    mu: &PolyhedralCurrent,
    eps: f64,
    mg: &MixedGrowth,
    kinematics: Kinematics,
    schedule: &Schedule,
) -> Result<EnergyReport> {
    check_eps(eps)?;
    let ev = Evaluation { beta, mu, eps, schedule };
    let residual = check_admissible(beta, &ev.target()?)?;
    ev.report(Variant::SubcriticalMixedGrowth, &densities(beta, mg, kinematics), None, None, residual)
}

/// `F_ε[β, Ω ∖ (supp μ)_ρ]`.
///
/// Compatibility outside the core is checked through the global constraint
/// `curl β = εμ`, which implies it.
pub fn f_eps_core(
    beta: &SpatialField,
    mu: &PolyhedralCurrent,
    eps: f64,
    rho_eps: f64,
    mg: &MixedGrowth,
    kinematics: Kinematics,
    schedule: &Schedule,
) -> Result<EnergyReport> {
    check_eps(eps)?;
    check_rho(beta, eps, rho_eps)?;
    let ev = Evaluation { beta, mu, eps, schedule };
    let residual = check_admissible(beta, &ev.target()?)?;
    let mask = core_mask(beta, mu, rho_eps);
    ev.report(Variant::CoreCutoff, &densities(beta, mg, kinematics), Some(&mask), Some(rho_eps), residual)
}

/// `F_ε[β, Ω]` for `curl β = φ_ε * εμ`.
#[allow(clippy::too_many_arguments)]
pub fn f_eps_moll(
    beta: &SpatialField,
    mu: &PolyhedralCurrent,
    eps: f64,
    mollifier: &Mollifier,
    mg: &MixedGrowth,
    kinematics: Kinematics,
    schedule: &Schedule,
) -> Result<EnergyReport> {
    check_eps(eps)?;
    let ev = Evaluation { beta, mu, eps, schedule };
    let target = mollify(&ev.target()?, eps, mollifier)?;
    let residual = check_admissible(beta, &target)?;
    ev.report(Variant::Mollified, &densities(beta, mg, kinematics), None, None, residual)
}

/// All three variants from one pair of fields, sharing the pointwise densities.
#[allow(clippy::too_many_arguments)]
pub(crate) fn evaluate_all(
    beta: &SpatialField,
    beta_moll: &SpatialField,
    mu: &PolyhedralCurrent,
    eps: f64,
    rho_eps: f64,
    mollifier: &Mollifier,
    mg: &MixedGrowth,
    kinematics: Kinematics,
    schedule: &Schedule,
) -> Result<[EnergyReport; 3]> {
    check_eps(eps)?;
    check_rho(beta, eps, rho_eps)?;
    let ev = Evaluation { beta, mu, eps, schedule };
    let target = ev.target()?;
    let residual = check_admissible(beta, &target)?;
    let w = densities(beta, mg, kinematics);
    let subcr = ev.report(Variant::SubcriticalMixedGrowth, &w, None, None, residual)?;
    let mask = core_mask(beta, mu, rho_eps);
    let core = ev.report(Variant::CoreCutoff, &w, Some(&mask), Some(rho_eps), residual)?;
    let mev = Evaluation { beta: beta_moll, ..ev };
    let mres = check_admissible(beta_moll, &mollify(&target, eps, mollifier)?)?;
    let moll = mev.report(Variant::Mollified, &densities(beta_moll, mg, kinematics), None, None, mres)?;
    Ok([subcr, core, moll])
}

/// How the line term of the limit is evaluated.
#[derive(Clone, Copy, Debug)]
pub struct LineTensionOptions {
    /// Use the relaxation upper estimate instead of `ψ`.
    pub use_rel: bool,
    pub profile: ProfileOptions,
    pub lattice: BravaisLattice,
    pub caps: Caps,
    pub graph: GraphOptions,
}

impl LineTensionOptions {
    pub fn plain(profile: ProfileOptions) -> Self {
        Self {
            use_rel: false,
            profile,
            lattice: BravaisLattice::cubic(),
            caps: Caps {
                max_norm: 1.5,
                max_count: 2,
            },
            graph: GraphOptions::new(0.25),
        }
    }

    pub fn relaxed(lattice: BravaisLattice, caps: Caps, graph: GraphOptions, profile: ProfileOptions) -> Self {
        Self {
            use_rel: true,
            profile,
            lattice,
            caps,
            graph,
        }
    }
}

/// The two parts of the limit functional.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitValue {
    pub bulk: f64,
    pub line: f64,
    pub total: f64,
}

/// `∫ ½ C_Q η·η + Σ_i ψ(θ_i, Q τ_i) |γ_i|` (finite kinematics) or
/// `∫ ½ C η·η + Σ_i ψ(θ_i, τ_i) |γ_i|` (linear kinematics).
pub fn f_limit(
    mu: &PolyhedralCurrent,
    eta: &SpatialField,
    q: &Rotation<f64>,
    c: &ElasticTensor,
    kinematics: Kinematics,
    line: &LineTensionOptions,
) -> Result<LimitValue> {
    let r = Spectrum::from_spatial(eta).curl_residual();
    if r > 1e-8 {
        return Err(Error::NotAdmissible(format!("η is not curl-free (spectral residual {r:e})")));
    }
    let q = match kinematics {
        Kinematics::Finite => *q,
        Kinematics::Linear => Rotation::identity(),
    };
    let cq = c.rotate(&q);
    let bulk = eta.energy(&cq);
    let mut total_line = 0.0;
    for (i, s) in mu.segments.iter().enumerate() {
        if line.lattice.coordinates(&s.theta).is_none() {
            return Err(Error::NotAdmissible(format!("segment {i}: θ = {:?} is not a lattice vector", s.theta)));
        }
        let t = q.apply(&mu.tangent(i));
        let value = if line.use_rel {
            psi_rel_upper(c, &s.theta, &t, &line.lattice, &line.caps, &line.graph, line.profile)?.psi_rel_upper
        } else {
            psi(c, &s.theta, &t, line.profile)?
        };
        total_line += value * mu.length(i);
    }
    Ok(LimitValue {
        bulk,
        line: total_line,
        total: bulk + total_line,
    })
}

/// The current with every multiplicity replaced by `Qᵀθ`.
pub fn rotate_multiplicities(mu: &PolyhedralCurrent, q: &Rotation<f64>) -> PolyhedralCurrent {
    let qt = q.transpose();
    let mut out = mu.clone();
    for s in &mut out.segments {
        s.theta = qt.apply(&s.theta);
        s.lattice_coords = None;
    }
    out.lattice = None;
    out
}

/// Gradient `∂_j u_i` of `u = a sin(k·x + φ)`.
pub fn plane_wave_gradient(amplitude: &Vector3<f64>, k: &Vector3<f64>, phase: f64, x: &Vector3<f64>) -> Matrix3<f64> {
    amplitude * k.transpose() * (k.dot(x) + phase).cos()
}

#[cfg(test)]
mod tests;
