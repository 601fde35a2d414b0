use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::{BravaisLattice, PolyhedralCurrent};
use crate::geometry::{segment_segment_distance, AxisBox};

const BALANCE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NodeImbalance {
    pub node: usize,
    pub imbalance: [f64; 3],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub balanced: bool,
    pub violations: Vec<NodeImbalance>,
    /// Nodes on the boundary of the ambient box, which are exempt.
    pub exempt: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LatticeReport {
    pub on_lattice: bool,
    /// Segments whose multiplicity is not in the lattice.
    pub off_lattice: Vec<usize>,
    /// Segments with θ = 0.
    pub null_segments: Vec<usize>,
    pub coordinates: Vec<Option<[i64; 3]>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DilutenessReport {
    pub dilute: bool,
    /// Condition (1): segments shorter than `h`.
    pub short_segments: Vec<usize>,
    /// Condition (2): pairs of disjoint segments closer than `αh`, with their distance.
    pub close_pairs: Vec<(usize, usize, f64)>,
    /// Condition (3): pairs sharing an endpoint at angle below `α`, with the angle.
    pub sharp_junctions: Vec<(usize, usize, f64)>,
    /// Condition (4): free endpoints (degree-one nodes) inside Ω.
    pub interior_endpoints: Vec<usize>,
}

impl DilutenessReport {
    pub fn conditions(&self) -> [bool; 4] {
        [
            self.short_segments.is_empty(),
            self.close_pairs.is_empty(),
            self.sharp_junctions.is_empty(),
            self.interior_endpoints.is_empty(),
        ]
    }
}

impl PolyhedralCurrent {
    fn node_balance(&self) -> Vec<Vector3<f64>> {
        let mut bal = vec![Vector3::zeros(); self.nodes.len()];
        for s in &self.segments {
            bal[s.a] += s.theta;
            bal[s.b] -= s.theta;
        }
        bal
    }

    fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.nodes.len()];
        for s in &self.segments {
            deg[s.a] += 1;
            deg[s.b] += 1;
        }
        deg
    }

    /// Kirchhoff balance `Σ_out θ - Σ_in θ = 0` at every node not on `∂Ω`.
    pub fn check_divergence_free(&self, omega: Option<&AxisBox>) -> DivergenceReport {
        let scale = self
            .segments
            .iter()
            .map(|s| s.theta.amax())
            .fold(1.0f64, f64::max);
        let mut violations = Vec::new();
        let mut exempt = Vec::new();
        for (node, b) in self.node_balance().into_iter().enumerate() {
            if let Some(o) = omega {
                if o.on_boundary(&self.nodes[node], 1e-12) {
                    exempt.push(node);
                    continue;
                }
            }
            if b.amax() > BALANCE_TOL * scale {
                violations.push(NodeImbalance {
                    node,
                    imbalance: [b[0], b[1], b[2]],
                });
            }
        }
        DivergenceReport {
            balanced: violations.is_empty(),
            violations,
            exempt,
        }
    }

    pub fn check_lattice(&self, lattice: &BravaisLattice) -> LatticeReport {
        let coordinates: Vec<_> = self.segments.iter().map(|s| lattice.coordinates(&s.theta)).collect();
        let off_lattice: Vec<usize> = (0..coordinates.len()).filter(|&i| coordinates[i].is_none()).collect();
        let null_segments = self
            .segments
            .iter()
            .enumerate()
            .filter(|(_, s)| s.theta.amax() == 0.0)
            .map(|(i, _)| i)
            .collect();
        LatticeReport {
            on_lattice: off_lattice.is_empty(),
            off_lattice,
            null_segments,
            coordinates,
        }
    }

    /// The four (h, α)-diluteness conditions.
    ///
    /// Junction nodes of any degree are allowed; condition (3) is applied to
    /// every pair of segments meeting at a node.
    pub fn check_dilute(&self, h: f64, alpha: f64, omega: &AxisBox) -> DilutenessReport {
        let n = self.segments.len();
        let short_segments = (0..n).filter(|&s| self.length(s) < h * (1.0 - 1e-12)).collect();
        let mut close_pairs = Vec::new();
        let mut sharp_junctions = Vec::new();
        for i in 0..n {
            let si = &self.segments[i];
            for j in i + 1..n {
                let sj = &self.segments[j];
                let shared = [si.a, si.b].into_iter().find(|x| *x == sj.a || *x == sj.b);
                match shared {
                    Some(node) => {
                        let away = |s: &super::Segment| {
                            let other = if s.a == node { s.b } else { s.a };
                            (self.nodes[other] - self.nodes[node]).normalize()
                        };
                        let angle = away(si).dot(&away(sj)).clamp(-1.0, 1.0).acos();
                        if angle < alpha {
                            sharp_junctions.push((i, j, angle));
                        }
                    }
                    None => {
                        let (p0, p1) = self.endpoints(i);
                        let (q0, q1) = self.endpoints(j);
                        let d = segment_segment_distance(&p0, &p1, &q0, &q1);
                        if d < alpha * h {
                            close_pairs.push((i, j, d));
                        }
                    }
                }
            }
        }
        let interior_endpoints = self
            .degrees()
            .into_iter()
            .enumerate()
            .filter(|&(node, d)| d == 1 && omega.contains_open(&self.nodes[node], 1e-12))
            .map(|(node, _)| node)
            .collect();
        let mut report = DilutenessReport {
            dilute: false,
            short_segments,
            close_pairs,
            sharp_junctions,
            interior_endpoints,
        };
        report.dilute = report.conditions().iter().all(|c| *c);
        report
    }
}
