use disloc_core::elasticity::ElasticTensor;
use disloc_core::fields::{concentration, mu_hat, solve_periodic, PeriodicBox};
use disloc_core::linetension::{psi, ProfileOptions};
use disloc_core::network::PolyhedralCurrent;
use nalgebra::Vector3;

fn main() {
    let n: usize = std::env::args().nth(1).map_or(128, |s| s.parse().unwrap());
    for (name, c, b) in [
        ("iso screw", ElasticTensor::isotropic(1.0, 1.0).unwrap(), Vector3::new(0.0, 0.0, 1.0)),
        ("iso edge", ElasticTensor::isotropic(1.0, 1.0).unwrap(), Vector3::new(1.0, 0.0, 0.0)),
        ("cubic edge", ElasticTensor::cubic(2.0, 1.2, 0.8).unwrap(), Vector3::new(1.0, 0.0, 0.0)),
    ] {
        let t = Vector3::new(0.0, 0.0, 1.0);
        let p = psi(&c, &b, &t, ProfileOptions::new(32)).unwrap();
        let g = PeriodicBox::new(1.0, n).unwrap();
        let line = PolyhedralCurrent::line(Vector3::new(0.5, 0.5, 0.0), Vector3::new(0.5, 0.5, 1.0), b);
        let start = std::time::Instant::now();
        let field = solve_periodic(&c, &mu_hat(&line, g).unwrap()).unwrap().to_spatial();
        println!("{name}: psi {p:.6} solve {:?}", start.elapsed());
        for k in [8.0, 16.0, 32.0, 64.0] {
            let eps = 1.0 / k;
            let nu = concentration(&field, &line, eps, &c).unwrap();
            let gap = (nu - p).abs();
            println!("  eps 1/{k}: nu {nu:.6} gap {gap:.6} rel {:.4} gap*ln {:.6}", gap / p, gap * (1.0 / eps).ln());
        }
    }
}
