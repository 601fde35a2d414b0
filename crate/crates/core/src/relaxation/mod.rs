//! Upper estimates of the relaxed line tension `ψ^rel_C(b, t)`.
//!
//! A straight unit chord with Burgers vector `b` may be replaced by any
//! family of lattice-valued paths in `B_{1/2}` joining `-t/2` to `t/2` whose
//! multiplicities add up to `b`. We enumerate integer decompositions
//! `b = Σ m_i b_i` under caps and route each `b_i` independently through a
//! lattice graph with edge cost `ψ_C(b_i, d) · ℓ`. The trivial decomposition
//! routed along the chord is always a candidate, so the estimate never
//! exceeds `ψ_C(b, t)`.

mod graph;

pub use graph::{GraphOptions, Route, RoutingGraph};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::elasticity::ElasticTensor;
use crate::error::{Error, Result};
use crate::linetension::ProfileOptions;
use crate::network::BravaisLattice;

/// Limits on the decomposition search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Caps {
    /// Largest admissible `|b_i|`.
    pub max_norm: f64,
    /// Largest admissible `Σ m_i`.
    pub max_count: usize,
}

/// Number of multisets the search may visit before giving up.
pub const CANDIDATE_LIMIT: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Part {
    pub coords: [i64; 3],
    pub vector: [f64; 3],
    pub count: usize,
}

/// `b = Σ m_i b_i` with distinct lattice vectors `b_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub parts: Vec<Part>,
}

impl Decomposition {
    pub fn total_count(&self) -> usize {
        self.parts.iter().map(|p| p.count).sum()
    }

    pub fn coords_sum(&self) -> [i64; 3] {
        let mut s = [0i64; 3];
        for p in &self.parts {
            for d in 0..3 {
                s[d] += p.coords[d] * p.count as i64;
            }
        }
        s
    }

    pub fn is_trivial(&self) -> bool {
        self.parts.len() == 1 && self.parts[0].count == 1
    }

    fn from_multiset(vectors: &[([i64; 3], Vector3<f64>)], chosen: &[usize]) -> Self {
        let mut parts: Vec<Part> = Vec::new();
        for &i in chosen {
            match parts.last_mut() {
                Some(p) if p.coords == vectors[i].0 => p.count += 1,
                _ => parts.push(Part {
                    coords: vectors[i].0,
                    vector: [vectors[i].1[0], vectors[i].1[1], vectors[i].1[2]],
                    count: 1,
                }),
            }
        }
        Self { parts }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Nonzero lattice vectors with `|F n| <= max_norm`, sorted by length then coordinates.
pub fn lattice_vectors(lattice: &BravaisLattice, max_norm: f64) -> Vec<([i64; 3], Vector3<f64>)> {
    let inv = lattice.generator.try_inverse().expect("lattice generator is invertible");
    let tol = 1e-12 * max_norm.max(1.0);
    let bound: Vec<i64> = (0..3).map(|i| (inv.row(i).norm() * max_norm + 1e-9).floor() as i64).collect();
    let mut out = Vec::new();
    for i in -bound[0]..=bound[0] {
        for j in -bound[1]..=bound[1] {
            for k in -bound[2]..=bound[2] {
                if i == 0 && j == 0 && k == 0 {
                    continue;
                }
                let v = lattice.vector([i, j, k]);
                if v.norm() <= max_norm + tol {
                    out.push(([i, j, k], v));
                }
            }
        }
    }
    out.sort_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap().then(a.0.cmp(&b.0)));
    out
}

/// All multisets of capped lattice vectors summing to `b`, plus the trivial one.
pub fn enumerate_decompositions(b: &Vector3<f64>, lattice: &BravaisLattice, caps: &Caps) -> Result<Vec<Decomposition>> {
    let target = lattice
        .coordinates(b)
        .ok_or_else(|| Error::InvalidArgument(format!("b = {b:?} is not a lattice vector")))?;
    if caps.max_count == 0 {
        return Err(Error::InvalidArgument("count cap 0 excludes the trivial decomposition".into()));
    }
    if target == [0, 0, 0] {
        return Ok(vec![Decomposition { parts: vec![] }]);
    }
    let vectors = lattice_vectors(lattice, caps.max_norm);
    let leaves: f64 = (1..=caps.max_count).map(|k| binomial(vectors.len() + k - 1, k)).sum();
    if leaves > CANDIDATE_LIMIT as f64 {
        return Err(Error::Blowup(leaves.min(usize::MAX as f64) as usize));
    }
    let reach = caps.max_norm * (1.0 + 1e-12);
    let mut found = Vec::new();
    let mut chosen = Vec::with_capacity(caps.max_count);
    search(&vectors, target, b, reach, caps.max_count, 0, [0; 3], &mut chosen, &mut found, lattice);
    if !found.iter().any(Decomposition::is_trivial) {
        found.insert(
            0,
            Decomposition {
                parts: vec![Part {
                    coords: target,
                    vector: [b[0], b[1], b[2]],
                    count: 1,
                }],
            },
        );
    }
    Ok(found)
}

#[allow(clippy::too_many_arguments)]
fn search(
    vectors: &[([i64; 3], Vector3<f64>)],
    target: [i64; 3],
    b: &Vector3<f64>,
    reach: f64,
    slots: usize,
    start: usize,
    sum: [i64; 3],
    chosen: &mut Vec<usize>,
    found: &mut Vec<Decomposition>,
    lattice: &BravaisLattice,
) {
    if !chosen.is_empty() && sum == target {
        found.push(Decomposition::from_multiset(vectors, chosen));
    }
    if slots == 0 {
        return;
    }
    for i in start..vectors.len() {
        let c = vectors[i].0;
        let next = [sum[0] + c[0], sum[1] + c[1], sum[2] + c[2]];
        // the remaining slots must be able to close the gap
        let rest = b - lattice.vector(next);
        if rest.norm() > reach * (slots - 1) as f64 + 1e-12 {
            continue;
        }
        chosen.push(i);
        search(vectors, target, b, reach, slots - 1, i, next, chosen, found, lattice);
        chosen.pop();
    }
}

/// One decomposition with its routed cost.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Certificate {
    pub decomposition: Decomposition,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RelaxationEstimate {
    pub psi: f64,
    pub psi_rel_upper: f64,
    pub best_decomposition: Decomposition,
    pub routes: Vec<Route>,
    pub candidates: usize,
    /// Every enumerated decomposition with its cost, best first.
    pub certificates: Vec<Certificate>,
}

/// `min_decompositions Σ m_i · cost(b_i)`, normalized by the unit chord.
pub fn psi_rel_upper(
    c: &ElasticTensor,
    b: &Vector3<f64>,
    t: &Vector3<f64>,
    lattice: &BravaisLattice,
    caps: &Caps,
    graph_options: &GraphOptions,
    profile: ProfileOptions,
) -> Result<RelaxationEstimate> {
    let decompositions = enumerate_decompositions(b, lattice, caps)?;
    let mut graph = RoutingGraph::new(t, graph_options)?;
    graph.prepare(c, profile)?;
    let psi = graph.psi_along_chord(b)?;
    let mut routes: std::collections::HashMap<[i64; 3], Route> = std::collections::HashMap::new();
    let mut certificates = Vec::with_capacity(decompositions.len());
    for d in &decompositions {
        let mut value = 0.0;
        for p in &d.parts {
            if !routes.contains_key(&p.coords) {
                let bi = Vector3::from(p.vector);
                let route = graph.shortest_route(&bi)?;
                routes.insert(p.coords, route);
            }
            value += p.count as f64 * routes[&p.coords].cost;
        }
        certificates.push(Certificate {
            decomposition: d.clone(),
            value,
        });
    }
    certificates.sort_by(|a, b| a.value.partial_cmp(&b.value).unwrap_or(std::cmp::Ordering::Equal));
    let best = certificates.first().cloned().expect("the trivial decomposition is always present");
    let best_routes = best
        .decomposition
        .parts
        .iter()
        .map(|p| {
            let mut r = routes[&p.coords].clone();
            r.count = p.count;
            r
        })
        .collect();
    Ok(RelaxationEstimate {
        psi,
        psi_rel_upper: best.value,
        best_decomposition: best.decomposition,
        routes: best_routes,
        candidates: decompositions.len(),
        certificates,
    })
}
