use std::collections::HashMap;

use nalgebra::{Matrix3, Vector3};
use petgraph::algo::astar;
use petgraph::graph::{NodeIndex, UnGraph};
use serde::{Deserialize, Serialize};

use crate::elasticity::ElasticTensor;
use crate::error::{Error, Result};
use crate::geometry::Rotation;
use crate::linetension::{tension_matrix, ProfileOptions};

/// Geometry of the routing graph in `B_{1/2}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphOptions {
    /// Lattice spacing `h` of the node grid.
    pub resolution: f64,
    /// Chord nodes connect to every grid node within this distance.
    #[serde(default = "default_chord_radius")]
    pub chord_radius: f64,
    /// Orientation of the node grid (rows of a rotation matrix).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<[[f64; 3]; 3]>,
}

fn default_chord_radius() -> f64 {
    0.125
}

impl GraphOptions {
    pub fn new(resolution: f64) -> Self {
        Self {
            resolution,
            chord_radius: default_chord_radius(),
            frame: None,
        }
    }

    pub fn rotated(mut self, q: &Rotation) -> Self {
        let m = q.matrix();
        self.frame = Some([
            [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
            [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
            [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
        ]);
        self
    }

    fn frame_matrix(&self) -> Result<Matrix3<f64>> {
        match self.frame {
            None => Ok(Matrix3::identity()),
            Some(r) => Ok(*Rotation::new(Matrix3::from_fn(|i, j| r[i][j]))?.matrix()),
        }
    }
}

/// A routed path for one Burgers vector.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Route {
    pub burgers: [f64; 3],
    pub count: usize,
    /// `Σ ψ(b_i, d_e) ℓ_e` along the path, for a single copy.
    pub cost: f64,
    pub path: Vec<[f64; 3]>,
}

#[derive(Clone, Copy, Debug)]
struct Edge {
    length: f64,
    direction: usize,
}

/// Nodes of `hZ³ ∩ B_{1/2}` (26-neighbour edges) and of the chord `[-t/2, t/2]`.
pub struct RoutingGraph {
    graph: UnGraph<Vector3<f64>, Edge>,
    start: NodeIndex,
    end: NodeIndex,
    chord: Vec<NodeIndex>,
    chord_direction: usize,
    directions: Vec<Vector3<f64>>,
    tensions: Option<Vec<Matrix3<f64>>>,
}

fn direction_key(d: &Vector3<f64>) -> [i64; 3] {
    let mut d = d.normalize();
    if let Some(i) = (0..3).find(|&i| d[i].abs() > 1e-9) {
        if d[i] < 0.0 {
            d = -d;
        }
    }
    [(d[0] * 1e9).round() as i64, (d[1] * 1e9).round() as i64, (d[2] * 1e9).round() as i64]
}

struct Builder {
    graph: UnGraph<Vector3<f64>, Edge>,
    keys: HashMap<[i64; 3], usize>,
    directions: Vec<Vector3<f64>>,
}

impl Builder {
    fn connect(&mut self, a: NodeIndex, b: NodeIndex) -> usize {
        let d = self.graph[b] - self.graph[a];
        let key = direction_key(&d);
        let next = self.directions.len();
        let id = *self.keys.entry(key).or_insert(next);
        if id == next {
            self.directions.push(d.normalize());
        }
        self.graph.update_edge(a, b, Edge {
            length: d.norm(),
            direction: id,
        });
        id
    }
}

impl RoutingGraph {
    pub fn new(t: &Vector3<f64>, opts: &GraphOptions) -> Result<Self> {
        let h = opts.resolution;
        if !(h > 0.0 && h <= 0.5) {
            return Err(Error::InvalidArgument(format!("graph resolution must lie in (0, 1/2], got {h}")));
        }
        if !(opts.chord_radius > 0.0) {
            return Err(Error::InvalidArgument("chord radius must be positive".into()));
        }
        let tn = t.norm();
        if !(tn > 0.0) {
            return Err(Error::InvalidArgument("t must be nonzero".into()));
        }
        let t = t / tn;
        let frame = opts.frame_matrix()?;
        let mut b = Builder {
            graph: UnGraph::default(),
            keys: HashMap::new(),
            directions: Vec::new(),
        };
        let m = (0.5 / h + 1e-9).floor() as i64;
        let mut grid: HashMap<[i64; 3], NodeIndex> = HashMap::new();
        for i in -m..=m {
            for j in -m..=m {
                for k in -m..=m {
                    let x = frame * Vector3::new(i as f64, j as f64, k as f64) * h;
                    if x.norm() <= 0.5 + 1e-12 {
                        grid.insert([i, j, k], b.graph.add_node(x));
                    }
                }
            }
        }
        let mut keys: Vec<[i64; 3]> = grid.keys().copied().collect();
        keys.sort();
        for key in &keys {
            for di in -1..=1i64 {
                for dj in -1..=1i64 {
                    for dk in -1..=1i64 {
                        let other = [key[0] + di, key[1] + dj, key[2] + dk];
                        if other > *key {
                            if let Some(&o) = grid.get(&other) {
                                b.connect(grid[key], o);
                            }
                        }
                    }
                }
            }
        }
        // chord nodes, merged with coincident grid nodes
        let pieces = (1.0 / h - 1e-9).ceil() as usize;
        let mut chord = Vec::with_capacity(pieces + 1);
        let grid_nodes: Vec<NodeIndex> = keys.iter().map(|k| grid[k]).collect();
        for j in 0..=pieces {
            let x = t * (j as f64 / pieces as f64 - 0.5);
            let existing = grid_nodes.iter().copied().find(|&n| (b.graph[n] - x).norm() < 1e-12);
            chord.push(existing.unwrap_or_else(|| b.graph.add_node(x)));
        }
        let mut chord_direction = usize::MAX;
        for w in chord.windows(2) {
            chord_direction = b.connect(w[0], w[1]);
        }
        for &cn in &chord {
            for &g in &grid_nodes {
                let d = (b.graph[g] - b.graph[cn]).norm();
                if g != cn && d <= opts.chord_radius + 1e-12 {
                    b.connect(cn, g);
                }
            }
        }
        Ok(Self {
            start: chord[0],
            end: chord[pieces],
            graph: b.graph,
            chord,
            chord_direction,
            directions: b.directions,
            tensions: None,
        })
    }

    /// A graph from explicit nodes and edges, routing from `start` to `end`.
    pub fn from_parts(nodes: &[Vector3<f64>], edges: &[(usize, usize)], start: usize, end: usize) -> Result<Self> {
        let mut b = Builder {
            graph: UnGraph::default(),
            keys: HashMap::new(),
            directions: Vec::new(),
        };
        let ids: Vec<NodeIndex> = nodes.iter().map(|x| b.graph.add_node(*x)).collect();
        for &(u, v) in edges {
            if u >= nodes.len() || v >= nodes.len() || (nodes[u] - nodes[v]).norm() == 0.0 {
                return Err(Error::InvalidArgument(format!("bad edge ({u}, {v})")));
            }
            b.connect(ids[u], ids[v]);
        }
        if start >= nodes.len() || end >= nodes.len() {
            return Err(Error::InvalidArgument("endpoint out of range".into()));
        }
        Ok(Self {
            start: ids[start],
            end: ids[end],
            graph: b.graph,
            chord: vec![],
            chord_direction: usize::MAX,
            directions: b.directions,
            tensions: None,
        })
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    /// Distinct edge directions (up to sign).
    pub fn directions(&self) -> &[Vector3<f64>] {
        &self.directions
    }

    /// Computes `Γ(d)` for every edge direction; needed before routing.
    pub fn prepare(&mut self, c: &ElasticTensor, profile: ProfileOptions) -> Result<()> {
        let tensions = self
            .directions
            .iter()
            .map(|d| tension_matrix(c, d, profile))
            .collect::<Result<Vec<_>>>()?;
        self.tensions = Some(tensions);
        Ok(())
    }

    fn tensions(&self) -> Result<&[Matrix3<f64>]> {
        self.tensions
            .as_deref()
            .ok_or_else(|| Error::InvalidArgument("routing graph has no edge costs; call prepare first".into()))
    }

    /// `ψ(b, t)` from the cached chord tension.
    pub fn psi_along_chord(&self, b: &Vector3<f64>) -> Result<f64> {
        let g = self.tensions()?;
        if self.chord_direction == usize::MAX {
            return Err(Error::InvalidArgument("graph has no chord".into()));
        }
        Ok(b.dot(&(g[self.chord_direction] * b)))
    }

    /// Cheapest path from `-t/2` to `t/2` for Burgers vector `b`.
    pub fn shortest_route(&self, b: &Vector3<f64>) -> Result<Route> {
        let g = self.tensions()?;
        let weights: Vec<f64> = g.iter().map(|m| b.dot(&(m * b)).max(0.0)).collect();
        let (cost, nodes) = astar(
            &self.graph,
            self.start,
            |n| n == self.end,
            |e| weights[e.weight().direction] * e.weight().length,
            |_| 0.0,
        )
        .ok_or(Error::Disconnected)?;
        let mut route = Route {
            burgers: [b[0], b[1], b[2]],
            count: 1,
            cost,
            path: nodes.iter().map(|n| self.graph[*n].into()).collect(),
        };
        // The chord itself costs exactly ψ(b, t); prefer it on ties and rounding.
        if !self.chord.is_empty() {
            let chord_cost = weights[self.chord_direction];
            if chord_cost <= route.cost {
                route.cost = chord_cost;
                route.path = self.chord.iter().map(|n| self.graph[*n].into()).collect();
            }
        }
        Ok(route)
    }
}
