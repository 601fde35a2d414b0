use std::time::Instant;

use disloc_core::cellproblem::{infcyl, CellGeometry, CellOptions, CylGrid};
use disloc_core::elasticity::ElasticTensor;
use nalgebra::Vector3;

fn main() {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse().unwrap()).collect();
    let (density, n_theta, n_z) = (args[0], args[1] as usize, args[2] as usize);
    let c = ElasticTensor::isotropic(1.0, 1.0).unwrap();
    for (name, b) in [("screw", Vector3::z()), ("edge", Vector3::x())] {
        for k in [2, 4, 6, 8, 10] {
            let ratio = 2f64.powi(k);
            let g = CellGeometry::new(1.0, 1.0, 1.0 / ratio).unwrap();
            let grid = CylGrid::with_density(density, ratio, n_theta, n_z).unwrap();
            let t0 = Instant::now();
            let s = infcyl(&c, &b, &Vector3::z(), g, grid, CellOptions::default()).unwrap();
            println!(
                "{name} r/R=2^-{k} grid={:?} value={:.6} psi={:.6} gap={:.4} it={} {:.1}s",
                grid,
                s.value,
                s.psi,
                s.gap(),
                s.iterations,
                t0.elapsed().as_secs_f64()
            );
        }
    }
}
