use std::fmt::Write as _;

use disloc_core::fields::ModeResiduals;
use disloc_core::limits::{GammaTable, TableSummary};
use disloc_core::network::{DilutenessReport, DivergenceReport, LatticeReport};
use disloc_core::relaxation::{Decomposition, Route};
use serde::{Deserialize, Serialize};

/// Version of every JSON document the CLI writes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorDocument {
    pub version: u32,
    pub error: ErrorBody,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorBody {
    pub kind: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistoryPoint {
    #[serde(rename = "M")]
    pub modes: usize,
    pub psi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsiOutput {
    pub version: u32,
    pub psi: f64,
    pub null_space_dim: usize,
    #[serde(rename = "M")]
    pub modes: usize,
    #[serde(rename = "N_q")]
    pub quadrature: usize,
    pub tail_ratio: f64,
    pub convergence_history: Vec<HistoryPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileOutput {
    pub version: u32,
    pub b: [f64; 3],
    pub t: [f64; 3],
    /// `Q_t` by rows.
    pub frame: [[f64; 3]; 3],
    pub a0: [f64; 3],
    pub cos: Vec<[f64; 3]>,
    pub sin: Vec<[f64; 3]>,
    pub g: [f64; 3],
    pub psi: f64,
    pub null_space_dim: usize,
    pub tail_ratio: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsiRelOutput {
    pub version: u32,
    pub psi: f64,
    pub psi_rel_upper: f64,
    pub best_decomposition: Decomposition,
    pub paths: Vec<Route>,
    pub candidates: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellRow {
    #[serde(rename = "r_over_R")]
    pub r_over_r: f64,
    pub value: f64,
    pub psi: f64,
    pub gap: f64,
    pub iterations: usize,
    pub energy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Richardson {
    pub limit: f64,
    pub kappa: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellOutput {
    pub version: u32,
    pub h: f64,
    pub outer: f64,
    pub rows: Vec<CellRow>,
    /// Fit of `value = limit - kappa / ln(R/r)` over the rows.
    pub richardson: Option<Richardson>,
}

impl CellOutput {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r_over_R,value,psi,gap,iterations\n");
        for r in &self.rows {
            let _ = writeln!(s, "{:.12e},{:.12e},{:.12e},{:.6e},{}", r.r_over_r, r.value, r.psi, r.gap, r.iterations);
        }
        s
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldOutput {
    pub version: u32,
    pub n: usize,
    #[serde(rename = "L")]
    pub l: f64,
    pub energy: f64,
    pub residuals: ModeResiduals,
    pub max_imag: f64,
    pub dump: Option<String>,
    pub dump_format_version: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRow {
    pub eps: f64,
    pub nu_eps: f64,
    pub psi_times_length: f64,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationTable {
    pub rows: Vec<ConcentrationRow>,
}

impl ConcentrationTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("eps,nu_eps,psi_times_length,gap\n");
        for r in &self.rows {
            let _ = writeln!(s, "{:.12e},{:.12e},{:.12e},{:.6e}", r.eps, r.nu_eps, r.psi_times_length, r.gap);
        }
        s
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkOutput {
    pub version: u32,
    pub segments: usize,
    pub total_length: f64,
    pub total_variation: f64,
    pub divergence: DivergenceReport,
    pub lattice: Option<LatticeReport>,
    pub dilute: DilutenessReport,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaSummaryDocument {
    pub version: u32,
    pub summary: TableSummary,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaTableDocument {
    pub version: u32,
    pub table: GammaTable,
}
