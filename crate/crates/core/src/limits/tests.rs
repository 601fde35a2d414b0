use super::*;
use crate::fields::{MollifierKind, PeriodicBox};
use crate::network::CurrentDocument;

fn mg() -> MixedGrowth {
    MixedGrowth::new(1.5).unwrap()
}

fn line(theta: Vector3<f64>) -> PolyhedralCurrent {
    PolyhedralCurrent::line(Vector3::new(0.5, 0.5, 0.0), Vector3::new(0.5, 0.5, 1.0), theta)
}

fn gradient_eta(grid: PeriodicBox, amp: f64) -> SpatialField {
    EtaSpec {
        constant: [[0.3 * amp, 0.1 * amp, 0.0], [0.0, -0.2 * amp, 0.05 * amp], [0.1 * amp, 0.0, 0.4 * amp]],
        waves: vec![
            PlaneWave {
                m: [1, 0, 2],
                amplitude: [amp, -0.5 * amp, 0.2 * amp],
                phase: 0.3,
            },
            PlaneWave {
                m: [0, -1, 1],
                amplitude: [0.0, 0.4 * amp, amp],
                phase: -1.1,
            },
        ],
    }
    .sample(grid)
}

fn q() -> Rotation<f64> {
    Rotation::from_axis_angle(&Vector3::new(0.3, -1.0, 0.4), 0.9)
}

#[test]
fn constant_rotation_without_dislocations_costs_nothing() {
    let grid = PeriodicBox::new(1.0, 16).unwrap();
    let beta = SpatialField::constant(grid, *q().matrix());
    let empty = PolyhedralCurrent::empty();
    let s = Schedule::default();
    let eps = 1.0 / 8.0;
    let a = f_eps_subcr(&beta, &empty, eps, &mg(), Kinematics::Finite, &s).unwrap();
    let b = f_eps_core(&beta, &empty, eps, eps, &mg(), Kinematics::Finite, &s).unwrap();
    let m = f_eps_moll(&beta, &empty, eps, &Mollifier::new(MollifierKind::Bump, 60.0), &mg(), Kinematics::Finite, &s).unwrap();
    for r in [a, b, m] {
        assert!(r.rescaled.abs() < 1e-20, "{r:?}");
        assert!(r.dilute);
    }
}

#[test]
fn rescaling_of_a_fixed_field() {
    let grid = PeriodicBox::new(1.0, 16).unwrap();
    let g = gradient_eta(grid, 0.01);
    let beta = SpatialField {
        data: g.data.iter().map(|a| Matrix3::identity() + a).collect(),
        ..g.clone()
    };
    let empty = PolyhedralCurrent::empty();
    let s = Schedule::default();
    let e = 1.0 / 8.0;
    let a = f_eps_subcr(&beta, &empty, e, &mg(), Kinematics::Finite, &s).unwrap();
    let b = f_eps_subcr(&beta, &empty, e / 2.0, &mg(), Kinematics::Finite, &s).unwrap();
    assert_eq!(a.raw, b.raw);
    let expected = (e * e * (1.0 / e).ln()) / ((e * e / 4.0) * (2.0 / e).ln());
    assert!((b.rescaled / a.rescaled - expected).abs() < 1e-12 * expected);
    // with the ε² factor held fixed only the logarithm changes
    let logs = (1.0 / e).ln() / (2.0 / e).ln();
    assert!((b.rescaled / a.rescaled / 4.0 - logs).abs() < 1e-12);
}

#[test]
fn inadmissible_fields_and_parameters_are_rejected() {
    let grid = PeriodicBox::new(1.0, 16).unwrap();
    let mu = line(Vector3::new(0.0, 0.0, 1.0));
    let s = Schedule::default();
    // a curl-free field cannot carry a dislocation
    let beta = SpatialField::constant(grid, Matrix3::identity());
    assert!(matches!(f_eps_subcr(&beta, &mu, 0.125, &mg(), Kinematics::Finite, &s), Err(Error::NotAdmissible(_))));
    // and a field with curl is not admissible without one
    let twisted = SpatialField::from_fn(grid, |x| {
        Matrix3::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, (2.0 * std::f64::consts::PI * x[0]).sin(), 0.0)
    });
    assert!(f_eps_subcr(&twisted, &PolyhedralCurrent::empty(), 0.125, &mg(), Kinematics::Finite, &s).is_err());
    let zero = SpatialField::constant(grid, Matrix3::zeros());
    let empty = PolyhedralCurrent::empty();
    assert!(f_eps_subcr(&zero, &empty, 0.5, &mg(), Kinematics::Linear, &s).is_err());
    assert!(f_eps_core(&zero, &empty, 0.125, 0.1, &mg(), Kinematics::Linear, &s).is_err());
    // core thinner than two cells
    assert!(f_eps_core(&zero, &empty, 0.1, 0.1, &mg(), Kinematics::Linear, &s).is_err());
    assert!(Schedule { h_power: 0.0, alpha_power: 1.0 }.validate().is_err());
}

struct LineFields {
    mu: PolyhedralCurrent,
    xi: SpatialField,
    psi: f64,
}

fn line_fields(n: usize, kin: Kinematics, theta: Vector3<f64>) -> LineFields {
    let grid = PeriodicBox::new(1.0, n).unwrap();
    let mu = line(theta);
    let c = kin.linearized_tensor::<f64>();
    let xi_hat = crate::fields::solve_periodic(&c, &mu_hat(&mu, grid).unwrap()).unwrap();
    // ξ̂(0) = 0 here, so the constant part of a recovery field stays Q
    LineFields {
        psi: psi(&c, &theta, &Vector3::new(0.0, 0.0, 1.0), ProfileOptions::new(16)).unwrap(),
        xi: xi_hat.to_spatial(),
        mu,
    }
}

#[test]
fn core_cutoff_never_exceeds_the_full_energy() {
    let f = line_fields(32, Kinematics::Finite, Vector3::new(1.0, 0.0, 1.0));
    let grid = f.xi.grid;
    let c = Kinematics::Finite.linearized_tensor::<f64>().rotate(&q());
    let xi = crate::fields::solve_periodic(&c, &mu_hat(&rotate_multiplicities(&f.mu, &q()), grid).unwrap())
        .unwrap()
        .to_spatial();
    let eta = SpatialField::constant(grid, Matrix3::zeros());
    for eps in [1.0 / 8.0, 1.0 / 16.0] {
        let beta = crate::fields::recovery_field(&q(), &eta, &xi, eps).unwrap();
        let full = f_eps_subcr(&beta, &f.mu, eps, &mg(), Kinematics::Finite, &Schedule::default()).unwrap();
        for rho in [eps, 2.0 * eps] {
            let core = f_eps_core(&beta, &f.mu, eps, rho, &mg(), Kinematics::Finite, &Schedule::default()).unwrap();
            assert!(core.rescaled >= 0.0 && core.rescaled <= full.rescaled);
        }
        assert!(full.curl_residual < 1e-10, "{}", full.curl_residual);
        assert!(full.dilute);
    }
}

#[test]
fn core_energy_follows_the_logarithm() {
    // Outside the core the quadratic regime holds, so the energy is ψ ln(R/ρ) per
    // unit length with one effective outer radius R for every ρ.
    let f = line_fields(64, Kinematics::Linear, Vector3::new(0.0, 0.0, 1.0));
    let eta = SpatialField::constant(f.xi.grid, Matrix3::zeros());
    let eps = 1.0 / 32.0;
    let beta = crate::fields::recovery_field_linear(&eta, &f.xi, eps).unwrap();
    let s = Schedule::default();
    let at = |rho: f64| f_eps_core(&beta, &f.mu, eps, rho, &mg(), Kinematics::Linear, &s).unwrap().rescaled;
    let r16 = at(1.0 / 16.0);
    let r_eff = (1.0 / 16.0) * (r16 * (1.0 / eps).ln() / f.psi).exp();
    for rho in [1.0 / 8.0, 3.0 / 32.0] {
        let predicted = (r_eff / rho).ln() / (1.0 / eps).ln() * f.psi;
        let got = at(rho);
        assert!((got - predicted).abs() < 0.03 * predicted, "rho {rho}: {got} vs {predicted}");
    }
    assert!(r_eff > 0.1 && r_eff < 1.0, "{r_eff}");
}

#[test]
fn finite_and_linear_densities_agree_to_second_order() {
    let grid = PeriodicBox::new(1.0, 16).unwrap();
    let g = gradient_eta(grid, 1.0);
    let empty = PolyhedralCurrent::empty();
    let s = Schedule::default();
    let mut pts = Vec::new();
    for delta in [0.02, 0.01, 0.005, 0.0025] {
        let fin = SpatialField {
            data: g.data.iter().map(|a| Matrix3::identity() + a * delta).collect(),
            ..g.clone()
        };
        let lin = SpatialField {
            data: g.data.iter().map(|a| a * delta).collect(),
            ..g.clone()
        };
        let a = f_eps_subcr(&fin, &empty, 0.1, &mg(), Kinematics::Finite, &s).unwrap().raw;
        let b = f_eps_subcr(&lin, &empty, 0.1, &mg(), Kinematics::Linear, &s).unwrap().raw;
        pts.push((delta, (a - 0.25 * b).abs()));
        assert!((a - 0.25 * b).abs() < 0.05 * a);
    }
    let slope = (pts[0].1.ln() - pts[3].1.ln()) / (pts[0].0.ln() - pts[3].0.ln());
    assert!(slope >= 2.5, "{pts:?} slope {slope}");
}

#[test]
fn limit_of_trivial_configurations() {
    let grid = PeriodicBox::new(1.0, 16).unwrap();
    let zero = SpatialField::constant(grid, Matrix3::zeros());
    let c = Kinematics::Finite.linearized_tensor::<f64>();
    let opts = LineTensionOptions::plain(ProfileOptions::new(16));
    let v = f_limit(&PolyhedralCurrent::empty(), &zero, &q(), &c, Kinematics::Finite, &opts).unwrap();
    assert_eq!(v.total, 0.0);
    let b = Vector3::new(1.0, 0.0, 0.0);
    let seg = PolyhedralCurrent::line(Vector3::new(0.1, 0.2, 0.3), Vector3::new(0.1, 0.2, 0.8), b);
    let v = f_limit(&seg, &zero, &Rotation::identity(), &c, Kinematics::Finite, &opts).unwrap();
    let expected = psi(&c, &b, &Vector3::new(0.0, 0.0, 1.0), ProfileOptions::new(16)).unwrap() * 0.5;
    assert!((v.total - expected).abs() < 1e-14);
    // off-lattice multiplicity
    let bad = PolyhedralCurrent::line(Vector3::zeros(), Vector3::new(0.0, 0.0, 1.0), Vector3::new(0.5, 0.0, 0.0));
    assert!(f_limit(&bad, &zero, &q(), &c, Kinematics::Finite, &opts).is_err());
    // η with curl
    let curly = SpatialField::from_fn(grid, |x| {
        Matrix3::new(0.0, (2.0 * std::f64::consts::PI * x[0]).cos(), 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    });
    assert!(f_limit(&seg, &curly, &q(), &c, Kinematics::Finite, &opts).is_err());
}

#[test]
fn limit_is_covariant_for_isotropic_tensors() {
    let grid = PeriodicBox::new(1.0, 16).unwrap();
    let eta = gradient_eta(grid, 0.5);
    let c = ElasticTensor::isotropic(0.7, 1.3).unwrap();
    let opts = LineTensionOptions::plain(ProfileOptions::new(16));
    let empty = PolyhedralCurrent::empty();
    // bulk term: C_Q = C
    let a = f_limit(&empty, &eta, &Rotation::identity(), &c, Kinematics::Finite, &opts).unwrap();
    let b = f_limit(&empty, &eta, &q(), &c, Kinematics::Finite, &opts).unwrap();
    assert!((a.total - b.total).abs() < 1e-12 * a.total);
    // line term: ψ(b, Qt) = ψ(Qᵀb, t) when C_Q = C
    let q = Rotation::about_z(0.8);
    let mu = line(Vector3::new(1.0, 0.0, 1.0));
    let rotated = rotate_multiplicities(&mu, &q);
    let with_q = f_limit(&mu, &eta, &q, &c, Kinematics::Finite, &opts).unwrap();
    let unrotated = LineTensionOptions {
        lattice: BravaisLattice::new(*q.transpose().matrix()).unwrap(),
        ..opts
    };
    let with_id = f_limit(&rotated, &eta, &Rotation::identity(), &c, Kinematics::Finite, &unrotated).unwrap();
    assert!((with_q.total - with_id.total).abs() < 1e-9 * with_q.total);
    // a rotation about the line leaves the value unchanged
    let plain = f_limit(&mu, &eta, &Rotation::identity(), &c, Kinematics::Finite, &opts).unwrap();
    assert!((with_q.line - plain.line).abs() < 1e-9 * plain.line);
}

#[test]
fn relaxed_line_term_is_below_plain() {
    let grid = PeriodicBox::new(1.0, 16).unwrap();
    let zero = SpatialField::constant(grid, Matrix3::zeros());
    let c = ElasticTensor::cubic(1.5, 1.0, 2.0).unwrap();
    let mu = PolyhedralCurrent::line(Vector3::zeros(), Vector3::new(0.2, -0.3, 1.0), Vector3::new(1.0, 1.0, 0.0));
    let profile = ProfileOptions::unchecked(8);
    let plain = f_limit(&mu, &zero, &Rotation::identity(), &c, Kinematics::Linear, &LineTensionOptions::plain(profile)).unwrap();
    let rel = LineTensionOptions::relaxed(BravaisLattice::cubic(), Caps { max_norm: 1.0, max_count: 2 }, GraphOptions::new(0.25), profile);
    let relaxed = f_limit(&mu, &zero, &Rotation::identity(), &c, Kinematics::Linear, &rel).unwrap();
    assert!(relaxed.line < plain.line);
}

fn line_config(n: usize, eps_grid: Vec<f64>) -> GammaConfig {
    let doc = CurrentDocument {
        lattice: None,
        nodes: vec![[0.5, 0.5, 0.0], [0.5, 0.5, 1.0]],
        segments: vec![crate::network::SegmentDocument {
            a: 0,
            b: 1,
            theta_lattice: None,
            theta: Some([1.0, 0.0, 0.0]),
        }],
        eps: 1.0,
    };
    GammaConfig {
        tensor: None,
        lattice: None,
        current: doc,
        grid: PeriodicBox::new(1.0, n).unwrap(),
        kinematics: Kinematics::Finite,
        p: 1.5,
        eps_grid,
        rho_rule: RhoRule::default(),
        use_rel: false,
        eta: EtaSpec::default(),
        rotation: None,
        schedule: Schedule::default(),
        mollifier: MollifierKind::Bump,
        modes: 16,
        caps: None,
        graph: None,
    }
}

#[test]
fn smooth_strain_without_dislocations_reaches_the_bulk_limit() {
    let mut cfg = line_config(32, vec![1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0]);
    cfg.current.nodes.clear();
    cfg.current.segments.clear();
    cfg.eta = EtaSpec {
        constant: [[0.02, 0.01, 0.0], [0.0, -0.03, 0.0], [0.01, 0.0, 0.02]],
        waves: vec![PlaneWave {
            m: [1, 2, 0],
            amplitude: [0.1, 0.0, -0.05],
            phase: 0.2,
        }],
    };
    let r = q().matrix().clone();
    cfg.rotation = Some([[r[(0, 0)], r[(0, 1)], r[(0, 2)]], [r[(1, 0)], r[(1, 1)], r[(1, 2)]], [r[(2, 0)], r[(2, 1)], r[(2, 2)]]]);
    cfg.rho_rule = RhoRule::Multiple { k: 4.0 };
    let table = gamma_table(&cfg).unwrap();
    // oracle: exact integral of ½ C η·η for the constant plus one plane wave
    let a = Matrix3::new(0.02, 0.01, 0.0, 0.0, -0.03, 0.0, 0.01, 0.0, 0.02);
    let c = Kinematics::Finite.linearized_tensor::<f64>();
    let k = Vector3::new(1.0, 2.0, 0.0) * 2.0 * std::f64::consts::PI;
    let g = Vector3::new(0.1, 0.0, -0.05) * k.transpose();
    let oracle = c.energy_density(&a) + 0.5 * c.energy_density(&g);
    assert!((table.summary.limit.total - oracle).abs() < 1e-12 * oracle);
    for r in table.rows.iter().filter(|r| r.eps == 1.0 / 64.0) {
        assert!(r.gap.unwrap() <= 0.01, "{r:?}");
    }
    assert!(table.summary.finest_spread < 1e-12);
}

#[test]
fn straight_line_table_is_consistent() {
    let cfg = line_config(32, vec![1.0 / 16.0, 1.0 / 8.0]);
    let table = gamma_table(&cfg).unwrap();
    assert_eq!(table.rows.len(), 6);
    assert_eq!(table.rows[0].eps, 1.0 / 8.0);
    for r in &table.rows {
        assert!(r.rescaled >= 0.0 && r.curl_residual < 1e-8);
    }
    for pair in table.rows.chunks(3) {
        assert!(pair[1].rescaled <= pair[0].rescaled);
    }
    let csv = table.to_csv();
    assert_eq!(csv.lines().count(), 7);
    assert!(csv.lines().nth(2).unwrap().starts_with("core-cutoff,"));
    let json = serde_json::to_string(&table).unwrap();
    let back: GammaTable = serde_json::from_str(&json).unwrap();
    assert_eq!(back.rows, table.rows);
}

#[test]
fn config_validation() {
    let mut cfg = line_config(16, vec![0.125]);
    cfg.tensor = Some(crate::elasticity::TensorSpec::isotropic(1.0, 1.0));
    assert!(matches!(gamma_table(&cfg), Err(Error::InvalidArgument(_))));
    cfg.tensor = Some(crate::elasticity::TensorSpec::isotropic(0.0, 1.0));
    cfg.rho_rule = RhoRule::Multiple { k: 0.5 };
    assert!(gamma_table(&cfg).is_err());
    cfg.rho_rule = RhoRule::Power { a: 1.0 };
    cfg.eps_grid = vec![0.125, 0.125];
    assert!(gamma_table(&cfg).is_err());
    cfg.eps_grid = vec![];
    assert!(gamma_table(&cfg).is_err());
    cfg.eps_grid = vec![0.125];
    cfg.kinematics = Kinematics::Linear;
    cfg.rotation = Some([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    assert!(gamma_table(&cfg).is_err());
    let text = serde_json::to_string(&line_config(16, vec![0.125])).unwrap();
    assert!(serde_json::from_str::<GammaConfig>(&text).is_ok());
    let extra = text.replacen('{', "{\"bogus\":1,", 1);
    assert!(serde_json::from_str::<GammaConfig>(&extra).is_err());
    let rule: RhoRule = serde_json::from_str(r#"{"rule":"power","a":0.9}"#).unwrap();
    assert_eq!(rule, RhoRule::Power { a: 0.9 });
}
