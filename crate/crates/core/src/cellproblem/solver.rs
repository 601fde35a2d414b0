use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use super::CylGrid;
use crate::error::{Error, Result};

/// Block sparse matrix with a fixed 27-point stencil per node and 3x3 blocks.
pub struct BlockCsr {
    grid: CylGrid,
    cols: Vec<usize>,
    blocks: Vec<Matrix3<f64>>,
}

const NONE: usize = usize::MAX;

impl BlockCsr {
    pub fn stencil27(grid: &CylGrid) -> Self {
        let n = grid.nodes();
        let mut cols = vec![NONE; 27 * n];
        for i in 0..grid.n_r {
            for j in 0..grid.n_theta {
                for k in 0..grid.n_z {
                    let row = grid.node(i, j, k);
                    for slot in 0..27 {
                        let (di, dj, dk) = (slot / 9, (slot / 3) % 3, slot % 3);
                        let (ii, kk) = (i + di, k + dk);
                        if ii == 0 || ii > grid.n_r || kk == 0 || kk > grid.n_z {
                            continue;
                        }
                        let jj = (j + grid.n_theta + dj - 1) % grid.n_theta;
                        cols[27 * row + slot] = grid.node(ii - 1, jj, kk - 1);
                    }
                }
            }
        }
        Self {
            grid: *grid,
            blocks: vec![Matrix3::zeros(); 27 * n],
            cols,
        }
    }

    fn coords(&self, node: usize) -> (usize, usize, usize) {
        let g = &self.grid;
        (node / (g.n_theta * g.n_z), (node / g.n_z) % g.n_theta, node % g.n_z)
    }

    fn slot(&self, row: usize, col: usize) -> usize {
        let (i, j, k) = self.coords(row);
        let (ii, jj, kk) = self.coords(col);
        let nt = self.grid.n_theta;
        let dj = (jj + nt + 1 - j) % nt;
        debug_assert!(ii + 1 >= i && ii <= i + 1 && kk + 1 >= k && kk <= k + 1 && dj <= 2);
        (ii + 1 - i) * 9 + dj * 3 + (kk + 1 - k)
    }

    pub fn add(&mut self, row: usize, col: usize, block: &Matrix3<f64>) {
        let s = self.slot(row, col);
        self.blocks[27 * row + s] += block;
    }

    pub fn apply(&self, x: &[Vector3<f64>]) -> Vec<Vector3<f64>> {
        let n = x.len();
        let mut y = vec![Vector3::zeros(); n];
        for (row, yr) in y.iter_mut().enumerate() {
            let mut acc = Vector3::zeros();
            for s in 0..27 {
                let c = self.cols[27 * row + s];
                if c != NONE {
                    acc += self.blocks[27 * row + s] * x[c];
                }
            }
            *yr = acc;
        }
        y
    }

    pub fn diagonal(&self, row: usize) -> Matrix3<f64> {
        self.blocks[27 * row + 13]
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CgReport {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn project_constants(v: &mut [Vector3<f64>]) {
    let mean = v.iter().sum::<Vector3<f64>>() / v.len() as f64;
    for x in v.iter_mut() {
        *x -= mean;
    }
}

fn dot(a: &[Vector3<f64>], b: &[Vector3<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

/// Block-Jacobi preconditioned CG for `K u = -rhs` on the complement of the
/// constant vectors (the kernel of `K`).
pub(crate) fn cg_singular(
    k: &BlockCsr,
    rhs: &[Vector3<f64>],
    tol: f64,
    max_iterations: usize,
) -> Result<(Vec<Vector3<f64>>, CgReport)> {
    let n = rhs.len();
    let mut r: Vec<Vector3<f64>> = rhs.iter().map(|v| -v).collect();
    project_constants(&mut r);
    let norm0 = dot(&r, &r).sqrt();
    let mut u = vec![Vector3::zeros(); n];
    if norm0 == 0.0 {
        return Ok((
            u,
            CgReport {
                iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }
    let inv: Vec<Matrix3<f64>> = (0..n)
        .map(|i| k.diagonal(i).try_inverse().unwrap_or_else(Matrix3::identity))
        .collect();
    let precondition = |r: &[Vector3<f64>]| {
        let mut z: Vec<Vector3<f64>> = r.iter().zip(&inv).map(|(v, m)| m * v).collect();
        project_constants(&mut z);
        z
    };
    let mut z = precondition(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut rel = 1.0;
    for it in 1..=max_iterations {
        let kp = k.apply(&p);
        let pkp = dot(&p, &kp);
        if pkp <= 0.0 {
            return Err(Error::NoConvergence {
                what: "conjugate gradients (non-positive curvature)",
                iterations: it,
                residual: rel,
            });
        }
        let alpha = rz / pkp;
        for i in 0..n {
            u[i] += p[i] * alpha;
            r[i] -= kp[i] * alpha;
        }
        rel = dot(&r, &r).sqrt() / norm0;
        if rel <= tol {
            project_constants(&mut u);
            return Ok((
                u,
                CgReport {
                    iterations: it,
                    relative_residual: rel,
                },
            ));
        }
        z = precondition(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + p[i] * beta;
        }
    }
    Err(Error::NoConvergence {
        what: "conjugate gradients",
        iterations: max_iterations,
        residual: rel,
    })
}
