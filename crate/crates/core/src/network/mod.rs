//! Polyhedral dislocation currents `μ = Σ θ_i ⊗ τ_i H¹⌞γ_i`.

mod checks;
mod weak;

pub use checks::{DilutenessReport, DivergenceReport, LatticeReport, NodeImbalance};
pub use weak::TestPanel;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{AxisBox, OrientedBox};

/// Bravais lattice `F Z³`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BravaisLattice {
    pub generator: Matrix3<f64>,
    pub tolerance: f64,
}

impl BravaisLattice {
    pub fn new(generator: Matrix3<f64>) -> Result<Self> {
        if !(generator.determinant().abs() > 1e-12) {
            return Err(Error::InvalidArgument("lattice generator is singular".into()));
        }
        Ok(Self {
            generator,
            tolerance: 1e-8,
        })
    }

    pub fn cubic() -> Self {
        Self {
            generator: Matrix3::identity(),
            tolerance: 1e-8,
        }
    }

    pub fn vector(&self, n: [i64; 3]) -> Vector3<f64> {
        self.generator * Vector3::new(n[0] as f64, n[1] as f64, n[2] as f64)
    }

    /// Integer coordinates of `theta`, if it is a lattice vector.
    pub fn coordinates(&self, theta: &Vector3<f64>) -> Option<[i64; 3]> {
        let inv = self.generator.try_inverse()?;
        let c = inv * theta;
        let r = c.map(f64::round);
        if (c - r).amax() <= self.tolerance {
            Some([r[0] as i64, r[1] as i64, r[2] as i64])
        } else {
            None
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub a: usize,
    pub b: usize,
    pub theta: Vector3<f64>,
    /// Integer coordinates of `theta` in the current's lattice, when known.
    pub lattice_coords: Option<[i64; 3]>,
}

impl Segment {
    pub fn new(a: usize, b: usize, theta: Vector3<f64>) -> Self {
        Self {
            a,
            b,
            theta,
            lattice_coords: None,
        }
    }
}

/// A polyhedral current. Tangents point from `a` to `b` for every segment.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyhedralCurrent {
    pub nodes: Vec<Vector3<f64>>,
    pub segments: Vec<Segment>,
    pub eps: f64,
    pub lattice: Option<BravaisLattice>,
}

impl PolyhedralCurrent {
    pub fn new(nodes: Vec<Vector3<f64>>) -> Self {
        Self {
            nodes,
            segments: Vec::new(),
            eps: 1.0,
            lattice: None,
        }
    }

    pub fn empty() -> Self {
        Self::new(Vec::new())
    }

    /// Closed polygon through `points` with constant multiplicity.
    pub fn polygon(points: &[Vector3<f64>], theta: Vector3<f64>) -> Self {
        let mut c = Self::new(points.to_vec());
        for i in 0..points.len() {
            c.segments.push(Segment::new(i, (i + 1) % points.len(), theta));
        }
        c
    }

    /// Single segment from `a` to `b`.
    pub fn line(a: Vector3<f64>, b: Vector3<f64>, theta: Vector3<f64>) -> Self {
        let mut c = Self::new(vec![a, b]);
        c.segments.push(Segment::new(0, 1, theta));
        c
    }

    pub fn add_segment(&mut self, a: usize, b: usize, theta: Vector3<f64>) -> Result<usize> {
        if a >= self.nodes.len() || b >= self.nodes.len() {
            return Err(Error::InvalidArgument(format!("segment ({a}, {b}) references a missing node")));
        }
        if (self.nodes[b] - self.nodes[a]).norm() == 0.0 {
            return Err(Error::Geometry(format!("segment ({a}, {b}) has zero length")));
        }
        self.segments.push(Segment::new(a, b, theta));
        Ok(self.segments.len() - 1)
    }

    pub fn endpoints(&self, s: usize) -> (Vector3<f64>, Vector3<f64>) {
        let seg = &self.segments[s];
        (self.nodes[seg.a], self.nodes[seg.b])
    }

    pub fn length(&self, s: usize) -> f64 {
        let (a, b) = self.endpoints(s);
        (b - a).norm()
    }

    pub fn tangent(&self, s: usize) -> Vector3<f64> {
        let (a, b) = self.endpoints(s);
        (b - a).normalize()
    }

    pub fn total_length(&self) -> f64 {
        (0..self.segments.len()).map(|s| self.length(s)).sum()
    }

    /// Structural checks: node references, positive lengths, finite data.
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(Error::InvalidArgument(format!("eps must be positive, got {}", self.eps)));
        }
        if self.nodes.iter().any(|n| !n.iter().all(|x| x.is_finite())) {
            return Err(Error::InvalidArgument("non-finite node coordinate".into()));
        }
        for (i, s) in self.segments.iter().enumerate() {
            if s.a >= self.nodes.len() || s.b >= self.nodes.len() {
                return Err(Error::InvalidArgument(format!("segment {i} references a missing node")));
            }
            if !(self.length(i) > 0.0) {
                return Err(Error::Geometry(format!("segment {i} has zero length")));
            }
            if !s.theta.iter().all(|x| x.is_finite()) {
                return Err(Error::InvalidArgument(format!("segment {i} has non-finite multiplicity")));
            }
        }
        Ok(())
    }

    /// `μ(A) = Σ θ_i ⊗ τ_i · length(γ_i ∩ A)`.
    pub fn mass_in(&self, region: &OrientedBox) -> Matrix3<f64> {
        let mut m = Matrix3::zeros();
        for (s, seg) in self.segments.iter().enumerate() {
            let (a, b) = self.endpoints(s);
            if let Some((s0, s1)) = region.clip_segment(&a, &b) {
                m += seg.theta * (b - a).transpose() * (s1 - s0);
            }
        }
        m
    }

    /// `|μ|(Ω) = Σ |θ_i| · length(γ_i ∩ Ω)`.
    pub fn total_variation(&self, omega: &AxisBox) -> f64 {
        let region = omega.as_oriented();
        self.segments
            .iter()
            .enumerate()
            .map(|(s, seg)| {
                let (a, b) = self.endpoints(s);
                region
                    .clip_segment(&a, &b)
                    .map_or(0.0, |(s0, s1)| seg.theta.norm() * (b - a).norm() * (s1 - s0))
            })
            .sum()
    }

    /// Copy with every multiplicity multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut c = self.clone();
        for s in c.segments.iter_mut() {
            s.theta *= factor;
            s.lattice_coords = None;
        }
        c
    }

    pub fn translated(&self, v: &Vector3<f64>) -> Self {
        let mut c = self.clone();
        for n in c.nodes.iter_mut() {
            *n += v;
        }
        c
    }

    /// Canonical orientation: reverses segments (negating θ) so that the
    /// first nonzero coordinate of the tangent is positive, then sorts them.
    pub fn normalized(&self) -> Self {
        let mut c = self.clone();
        for s in 0..c.segments.len() {
            let t = c.tangent(s);
            let first = t.iter().copied().find(|x| x.abs() > 1e-14).unwrap_or(0.0);
            if first < 0.0 {
                let seg = &mut c.segments[s];
                std::mem::swap(&mut seg.a, &mut seg.b);
                seg.theta = -seg.theta;
                seg.lattice_coords = seg.lattice_coords.map(|n| [-n[0], -n[1], -n[2]]);
            }
        }
        let key = |c: &Self, s: &Segment| {
            let a = c.nodes[s.a];
            let b = c.nodes[s.b];
            [a[0], a[1], a[2], b[0], b[1], b[2]]
        };
        let mut segs = c.segments.clone();
        segs.sort_by(|x, y| key(&c, x).partial_cmp(&key(&c, y)).unwrap_or(std::cmp::Ordering::Equal));
        c.segments = segs;
        c
    }

    /// Splits every segment into `ceil(len / 2h)` equal pieces, so that all
    /// pieces have length in `[h, 2h]` (segments of length `<= 2h` are kept).
    pub fn subdivide(&self, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::InvalidArgument(format!("h must be positive, got {h}")));
        }
        let mut out = Self::new(self.nodes.clone());
        out.eps = self.eps;
        out.lattice = self.lattice;
        for (s, seg) in self.segments.iter().enumerate() {
            let len = self.length(s);
            if len < h * (1.0 - 1e-12) {
                return Err(Error::Geometry(format!("segment {s} has length {len} < h = {h}")));
            }
            let k = ((len / (2.0 * h)) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
            let (a, b) = self.endpoints(s);
            let mut prev = seg.a;
            for piece in 1..=k {
                let next = if piece == k {
                    seg.b
                } else {
                    out.nodes.push(a + (b - a) * (piece as f64 / k as f64));
                    out.nodes.len() - 1
                };
                out.segments.push(Segment {
                    a: prev,
                    b: next,
                    theta: seg.theta,
                    lattice_coords: seg.lattice_coords,
                });
                prev = next;
            }
        }
        Ok(out)
    }

    /// Attaches lattice coordinates to every segment; fails if some θ is off-lattice.
    pub fn assign_lattice(&mut self, lattice: BravaisLattice) -> Result<()> {
        for (i, s) in self.segments.iter_mut().enumerate() {
            s.lattice_coords = Some(lattice.coordinates(&s.theta).ok_or_else(|| {
                Error::InvalidArgument(format!("segment {i}: multiplicity {:?} is not a lattice vector", s.theta))
            })?);
        }
        self.lattice = Some(lattice);
        Ok(())
    }

    pub fn to_document(&self) -> CurrentDocument {
        CurrentDocument {
            lattice: self.lattice.map(|l| matrix_rows(&l.generator)),
            nodes: self.nodes.iter().map(|n| [n[0], n[1], n[2]]).collect(),
            segments: self
                .segments
                .iter()
                .map(|s| SegmentDocument {
                    a: s.a,
                    b: s.b,
                    theta_lattice: s.lattice_coords,
                    theta: if s.lattice_coords.is_some() {
                        None
                    } else {
                        Some([s.theta[0], s.theta[1], s.theta[2]])
                    },
                })
                .collect(),
            eps: self.eps,
        }
    }

    pub fn from_document(doc: &CurrentDocument) -> Result<Self> {
        let lattice = match doc.lattice {
            Some(rows) => Some(BravaisLattice::new(Matrix3::from_fn(|i, j| rows[i][j]))?),
            None => None,
        };
        let mut c = Self::new(doc.nodes.iter().map(|n| Vector3::from(*n)).collect());
        c.eps = doc.eps;
        c.lattice = lattice;
        for (i, s) in doc.segments.iter().enumerate() {
            let theta = match (s.theta_lattice, s.theta, lattice) {
                (Some(n), None, Some(l)) => l.vector(n),
                (Some(_), None, None) => {
                    return Err(Error::InvalidArgument(format!(
                        "segment {i}: theta_lattice given but the current has no lattice"
                    )))
                }
                (None, Some(t), _) => Vector3::from(t),
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "segment {i}: exactly one of theta_lattice and theta is required"
                    )))
                }
            };
            c.segments.push(Segment {
                a: s.a,
                b: s.b,
                theta,
                lattice_coords: s.theta_lattice,
            });
        }
        c.validate()?;
        Ok(c)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_document(&serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("current serializes")
    }
}

fn matrix_rows(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    [
        [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
        [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
        [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
    ]
}

/// JSON form of a current: `{lattice, nodes, segments: [{a, b, theta_lattice | theta}], eps}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurrentDocument {
    /// Lattice generator `F` by rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<[[f64; 3]; 3]>,
    pub nodes: Vec<[f64; 3]>,
    pub segments: Vec<SegmentDocument>,
    #[serde(default = "one")]
    pub eps: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentDocument {
    pub a: usize,
    pub b: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_lattice: Option<[i64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<[f64; 3]>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn total_variation_clips_to_box() {
        let omega = AxisBox::cube(1.0);
        let c = PolyhedralCurrent::line(Vector3::new(0.2, 0.5, 0.5), Vector3::new(0.2, 0.5, 1.5), Vector3::x());
        assert_relative_eq!(c.total_variation(&omega), 0.5, epsilon = 1e-15);
        let c = PolyhedralCurrent::line(Vector3::new(0.0, 0.5, 0.5), Vector3::new(1.0, 0.5, 0.5), Vector3::z());
        assert_relative_eq!(c.total_variation(&omega), 1.0, epsilon = 1e-15);
        assert_relative_eq!(c.scaled(0.01).total_variation(&omega), 0.01, epsilon = 1e-15);
    }

    #[test]
    fn subdivide_lengths() {
        let h = 0.1;
        let c = PolyhedralCurrent::line(Vector3::zeros(), Vector3::new(5.0 * h, 0.0, 0.0), Vector3::x());
        let s = c.subdivide(h).unwrap();
        assert_eq!(s.segments.len(), 3);
        for i in 0..3 {
            let l = s.length(i);
            assert!(l >= h && l <= 2.0 * h);
        }
        let omega = AxisBox::new([-1.0; 3], [1.0; 3]).unwrap();
        assert_relative_eq!(s.total_variation(&omega), c.total_variation(&omega), epsilon = 1e-12);
        let c15 = PolyhedralCurrent::line(Vector3::zeros(), Vector3::new(1.5 * h, 0.0, 0.0), Vector3::x());
        assert_eq!(c15.subdivide(h).unwrap().segments.len(), 1);
        let c2 = PolyhedralCurrent::line(Vector3::zeros(), Vector3::new(2.0 * h, 0.0, 0.0), Vector3::x());
        assert_eq!(c2.subdivide(h).unwrap().segments.len(), 1);
        let short = PolyhedralCurrent::line(Vector3::zeros(), Vector3::new(0.5 * h, 0.0, 0.0), Vector3::x());
        assert!(short.subdivide(h).is_err());
    }

    #[test]
    fn json_round_trip_is_bit_stable() {
        let mut c = PolyhedralCurrent::polygon(
            &[
                Vector3::new(0.1, 0.2, 0.3),
                Vector3::new(0.7, 0.2 + 1e-17, 0.3),
                Vector3::new(0.1, 0.9, 1.0 / 3.0),
            ],
            Vector3::new(1.0, 0.0, 0.0),
        );
        c.assign_lattice(BravaisLattice::cubic()).unwrap();
        let s = c.to_json();
        let back = PolyhedralCurrent::from_json(&s).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_json(), s);
    }

    #[test]
    fn normalization_identifies_reversed_segments() {
        let a = PolyhedralCurrent::line(Vector3::zeros(), Vector3::new(1.0, 0.0, 0.0), Vector3::z());
        let b = PolyhedralCurrent::line(Vector3::new(1.0, 0.0, 0.0), Vector3::zeros(), -Vector3::z());
        let (na, nb) = (a.normalized(), b.normalized());
        assert_eq!(na.endpoints(0), nb.endpoints(0));
        assert_eq!(na.segments[0].theta, nb.segments[0].theta);
    }

    #[test]
    fn lattice_coordinates() {
        let l = BravaisLattice::new(Matrix3::new(1.0, 0.5, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0)).unwrap();
        assert_eq!(l.coordinates(&l.vector([1, -2, 3])), Some([1, -2, 3]));
        assert_eq!(l.coordinates(&(l.vector([1, 0, 0]) * 0.5)), None);
        assert!(BravaisLattice::new(Matrix3::zeros()).is_err());
    }
}
