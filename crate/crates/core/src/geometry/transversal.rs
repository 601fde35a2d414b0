use nalgebra::Vector3;
use serde::Serialize;

use super::AxisBox;
use crate::network::PolyhedralCurrent;

/// Minimal angle between a crossing segment and the face it crosses.
pub const MIN_ANGLE: f64 = 1e-6;
const TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    /// The segment lies in a face.
    InFace,
    /// The crossing is on an edge or corner, where the box has no normal.
    AtEdge,
    /// The segment meets the face at an angle below [`MIN_ANGLE`].
    Grazing,
    /// Several segments meet the boundary at the same point.
    Shared,
}

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub segment: usize,
    pub point: [f64; 3],
}

#[derive(Clone, Debug, Serialize)]
pub struct Intersection {
    pub segment: usize,
    /// Face index `2d + side` (`side = 1` for the upper face along axis `d`).
    pub face: usize,
    pub point: [f64; 3],
}

#[derive(Clone, Debug, Serialize)]
pub struct TransversalityReport {
    pub transversal: bool,
    pub intersections: Vec<Intersection>,
    pub violations: Vec<Violation>,
}

/// Checks that `curve` meets `∂Ω` only transversally at interior face points.
pub fn transversal(curve: &PolyhedralCurrent, omega: &AxisBox) -> TransversalityReport {
    let mut intersections = Vec::new();
    let mut violations = Vec::new();
    let scale = (0..3).map(|d| omega.max[d] - omega.min[d]).fold(0.0, f64::max);
    let tol = TOL * scale.max(1.0);
    for s in 0..curve.segments.len() {
        let (a, b) = curve.endpoints(s);
        let dir = (b - a).normalize();
        let mut edge_reported = false;
        for d in 0..3 {
            for (side, plane) in [omega.min[d], omega.max[d]].into_iter().enumerate() {
                let (da, db) = (a[d] - plane, b[d] - plane);
                let in_face_rect = |p: &Vector3<f64>| {
                    (0..3).filter(|&e| e != d).all(|e| p[e] >= omega.min[e] - tol && p[e] <= omega.max[e] + tol)
                };
                if da.abs() <= tol && db.abs() <= tol {
                    // Segment in the plane; a violation if it touches the face.
                    if let Some(p) = overlap_point(&a, &b, omega, d, tol) {
                        violations.push(Violation {
                            kind: ViolationKind::InFace,
                            segment: s,
                            point: p.into(),
                        });
                    }
                    continue;
                }
                if da * db > 0.0 && da.abs() > tol && db.abs() > tol {
                    continue;
                }
                let u = (da / (da - db)).clamp(0.0, 1.0);
                let mut p = a + (b - a) * u;
                p[d] = plane;
                if !in_face_rect(&p) {
                    continue;
                }
                intersections.push(Intersection {
                    segment: s,
                    face: 2 * d + side,
                    point: p.into(),
                });
                let on_edge = (0..3)
                    .filter(|&e| e != d)
                    .any(|e| (p[e] - omega.min[e]).abs() <= tol || (p[e] - omega.max[e]).abs() <= tol);
                if on_edge {
                    if !edge_reported {
                        violations.push(Violation {
                            kind: ViolationKind::AtEdge,
                            segment: s,
                            point: p.into(),
                        });
                        edge_reported = true;
                    }
                } else if dir[d].abs().asin() < MIN_ANGLE {
                    violations.push(Violation {
                        kind: ViolationKind::Grazing,
                        segment: s,
                        point: p.into(),
                    });
                }
            }
        }
    }
    for i in 0..intersections.len() {
        for j in 0..i {
            let (p, q) = (Vector3::from(intersections[i].point), Vector3::from(intersections[j].point));
            if intersections[i].segment != intersections[j].segment && (p - q).norm() <= tol {
                violations.push(Violation {
                    kind: ViolationKind::Shared,
                    segment: intersections[i].segment,
                    point: intersections[i].point,
                });
            }
        }
    }
    TransversalityReport {
        transversal: violations.is_empty(),
        intersections,
        violations,
    }
}

/// A point of `[a, b] ∩ face`, for a segment lying in the plane of a face normal to `d`.
fn overlap_point(a: &Vector3<f64>, b: &Vector3<f64>, omega: &AxisBox, d: usize, tol: f64) -> Option<Vector3<f64>> {
    let mut lo = Vector3::from(omega.min);
    let mut hi = Vector3::from(omega.max);
    lo[d] = f64::NEG_INFINITY;
    hi[d] = f64::INFINITY;
    lo.add_scalar_mut(-tol);
    hi.add_scalar_mut(tol);
    super::clip_to_slabs(a, b, &lo, &hi).map(|(s0, s1)| a + (b - a) * (0.5 * (s0 + s1)))
}
