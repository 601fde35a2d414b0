use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::{evaluate_all, f_limit, plane_wave_gradient, rotate_multiplicities, EnergyReport, LimitValue, LineTensionOptions, Schedule, Variant};
use crate::elasticity::{Kinematics, MixedGrowth, TensorSpec};
use crate::error::{Error, Result};
use crate::fields::{mollify, mu_hat, recovery_field, recovery_field_linear, solve_periodic, Mollifier, MollifierKind, PeriodicBox, SpatialField};
use crate::geometry::Rotation;
use crate::linetension::ProfileOptions;
use crate::network::{BravaisLattice, CurrentDocument, PolyhedralCurrent};
use crate::relaxation::{Caps, GraphOptions};

/// Core radius as a function of `ε`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RhoRule {
    /// `ρ_ε = k ε`, `k >= 1`.
    Multiple { k: f64 },
    /// `ρ_ε = ε^a`, `0 < a <= 1`.
    Power { a: f64 },
}

impl Default for RhoRule {
    fn default() -> Self {
        RhoRule::Multiple { k: 1.0 }
    }
}

impl RhoRule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RhoRule::Multiple { k } if k >= 1.0 => Ok(()),
            RhoRule::Power { a } if a > 0.0 && a <= 1.0 => Ok(()),
            _ => Err(Error::InvalidArgument(format!("rho_rule {self:?} does not guarantee ρ_ε >= ε"))),
        }
    }

    pub fn at(&self, eps: f64) -> f64 {
        match *self {
            RhoRule::Multiple { k } => k * eps,
            RhoRule::Power { a } => eps.powf(a),
        }
    }
}

/// `u = a sin(2π m·x / L + phase)`; contributes `∇u` to `η`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneWave {
    pub m: [i64; 3],
    pub amplitude: [f64; 3],
    #[serde(default)]
    pub phase: f64,
}

/// Curl-free `η`: a constant matrix plus gradients of plane waves.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtaSpec {
    #[serde(default)]
    pub constant: [[f64; 3]; 3],
    #[serde(default)]
    pub waves: Vec<PlaneWave>,
}

impl EtaSpec {
    pub fn sample(&self, grid: PeriodicBox) -> SpatialField {
        let a = Matrix3::from_fn(|i, j| self.constant[i][j]);
        let two_pi_over_l = 2.0 * std::f64::consts::PI / grid.l;
        let waves: Vec<(Vector3<f64>, Vector3<f64>, f64)> = self
            .waves
            .iter()
            .map(|w| {
                let k = Vector3::new(w.m[0] as f64, w.m[1] as f64, w.m[2] as f64) * two_pi_over_l;
                (Vector3::from(w.amplitude), k, w.phase)
            })
            .collect();
        SpatialField::from_fn(grid, |x| {
            waves.iter().fold(a, |acc, (amp, k, ph)| acc + plane_wave_gradient(amp, k, *ph, x))
        })
    }
}

fn default_mollifier() -> MollifierKind {
    MollifierKind::Bump
}

fn default_modes() -> usize {
    32
}

/// Input of [`gamma_table`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaConfig {
    /// Must equal `D²W` at the reference state of the chosen kinematics when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tensor: Option<TensorSpec>,
    /// Lattice generator by rows; defaults to the current's lattice, then to `Z³`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<[[f64; 3]; 3]>,
    pub current: CurrentDocument,
    #[serde(rename = "box")]
    pub grid: PeriodicBox,
    pub kinematics: Kinematics,
    pub p: f64,
    pub eps_grid: Vec<f64>,
    #[serde(default)]
    pub rho_rule: RhoRule,
    #[serde(default)]
    pub use_rel: bool,
    #[serde(default)]
    pub eta: EtaSpec,
    /// `Q` by rows (finite kinematics only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<[[f64; 3]; 3]>,
    #[serde(default)]
    pub schedule: Schedule,
    #[serde(default = "default_mollifier")]
    pub mollifier: MollifierKind,
    /// Fourier modes of the angular profiles behind `ψ`.
    #[serde(default = "default_modes")]
    pub modes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caps: Option<Caps>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphOptions>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableSummary {
    pub limit: LimitValue,
    pub finest_eps: f64,
    /// `(max - min) / max` of the three rescaled energies at the finest `ε`.
    pub finest_spread: f64,
    /// Per variant: gap to the limit strictly decreases along the grid.
    pub gaps_decreasing: BTreeMap<String, bool>,
    pub all_dilute: bool,
    #[serde(rename = "box")]
    pub grid: PeriodicBox,
    pub kinematics: Kinematics,
    pub p: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GammaTable {
    /// Three reports per `ε`, coarsest `ε` first.
    pub rows: Vec<EnergyReport>,
    pub summary: TableSummary,
}

impl GammaTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("variant,eps,rho_eps,h_eps,alpha_eps,dilute,raw,rescaled,limit,gap,curl_residual\n");
        for r in &self.rows {
            let opt = |v: Option<f64>| v.map(|x| format!("{x:.12e}")).unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{:.12e},{},{:.12e},{:.12e},{},{:.12e},{:.12e},{},{},{:.3e}",
                r.variant.name(),
                r.eps,
                opt(r.rho_eps),
                r.h_eps,
                r.alpha_eps,
                r.dilute,
                r.raw,
                r.rescaled,
                opt(r.limit),
                opt(r.gap),
                r.curl_residual
            );
        }
        s
    }

    pub fn variant(&self, v: Variant) -> impl Iterator<Item = &EnergyReport> {
        self.rows.iter().filter(move |r| r.variant == v)
    }
}

fn rows_to_matrix(rows: [[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| rows[i][j])
}

/// ε-sweep of the three regularized energies of the recovery field against the limit.
pub fn gamma_table(config: &GammaConfig) -> Result<GammaTable> {
    let grid = PeriodicBox::new(config.grid.l, config.grid.n)?;
    let mg = MixedGrowth::new(config.p)?;
    config.rho_rule.validate()?;
    config.schedule.validate()?;
    if config.eps_grid.is_empty() {
        return Err(Error::InvalidArgument("eps_grid is empty".into()));
    }
    let mut eps_grid = config.eps_grid.clone();
    eps_grid.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    if eps_grid.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument("eps_grid has repeated values".into()));
    }
    let kin = config.kinematics;
    let c = kin.linearized_tensor::<f64>();
    if let Some(spec) = &config.tensor {
        let given = spec.build()?;
        let diff = (given.matrix() - c.matrix()).norm();
        if diff > 1e-9 * c.matrix().norm() {
            return Err(Error::InvalidArgument(format!(
                "tensor does not match D²W of the {kin:?} density (difference {diff:e}); the energy density fixes C"
            )));
        }
    }
    let q = match (kin, config.rotation) {
        (_, None) => Rotation::identity(),
        (Kinematics::Finite, Some(rows)) => Rotation::new(rows_to_matrix(rows))?,
        (Kinematics::Linear, Some(_)) => {
            return Err(Error::InvalidArgument("a rotation only enters finite kinematics".into()))
        }
    };
    let mu = PolyhedralCurrent::from_document(&config.current)?;
    let lattice = match (config.lattice, mu.lattice) {
        (Some(rows), _) => BravaisLattice::new(rows_to_matrix(rows))?,
        (None, Some(l)) => l,
        (None, None) => BravaisLattice::cubic(),
    };
    let profile = ProfileOptions::new(config.modes);
    let line = if config.use_rel {
        let defaults = LineTensionOptions::plain(profile);
        LineTensionOptions::relaxed(
            lattice,
            config.caps.unwrap_or(defaults.caps),
            config.graph.unwrap_or(defaults.graph),
            profile,
        )
    } else {
        LineTensionOptions { lattice, ..LineTensionOptions::plain(profile) }
    };
    let eta = config.eta.sample(grid);
    let limit = f_limit(&mu, &eta, &q, &c, kin, &line)?;

    // ξ solves curl ξ = Qᵀμ with C_Q so that curl(Qξ) = μ.
    let cq = c.rotate(&q);
    let mu_q = mu_hat(&rotate_multiplicities(&mu, &q), grid)?;
    let xi = solve_periodic(&cq, &mu_q)?.to_spatial();
    let q_max = eps_grid[0] * 3f64.sqrt() * std::f64::consts::PI * grid.n as f64 / grid.l + 1.0;
    let mollifier = Mollifier::new(config.mollifier, q_max);
    let recover = |xi: &SpatialField, eps: f64| match kin {
        Kinematics::Finite => recovery_field(&q, &eta, xi, eps),
        Kinematics::Linear => recovery_field_linear(&eta, xi, eps),
    };

    let mut rows = Vec::with_capacity(3 * eps_grid.len());
    for &eps in &eps_grid {
        let xi_moll = solve_periodic(&cq, &mollify(&mu_q, eps, &mollifier)?)?.to_spatial();
        let beta = recover(&xi, eps)?;
        let beta_moll = recover(&xi_moll, eps)?;
        let reports = evaluate_all(&beta, &beta_moll, &mu, eps, config.rho_rule.at(eps), &mollifier, &mg, kin, &config.schedule)?;
        rows.extend(reports.into_iter().map(|r| r.with_limit(limit.total)));
    }

    let finest = &rows[rows.len() - 3..];
    let hi = finest.iter().map(|r| r.rescaled).fold(f64::MIN, f64::max);
    let lo = finest.iter().map(|r| r.rescaled).fold(f64::MAX, f64::min);
    let gaps_decreasing = Variant::ALL
        .iter()
        .map(|v| {
            let gaps: Vec<f64> = rows.iter().filter(|r| r.variant == *v).filter_map(|r| r.gap).collect();
            (v.name().to_string(), gaps.windows(2).all(|w| w[1] < w[0]))
        })
        .collect();
    let summary = TableSummary {
        limit,
        finest_eps: *eps_grid.last().unwrap(),
        finest_spread: if hi > 0.0 { (hi - lo) / hi } else { 0.0 },
        gaps_decreasing,
        all_dilute: rows.iter().all(|r| r.dilute),
        grid,
        kinematics: kin,
        p: config.p,
    };
    Ok(GammaTable { rows, summary })
}
