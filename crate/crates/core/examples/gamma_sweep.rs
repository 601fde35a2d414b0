use disloc_core::limits::{gamma_table, GammaConfig};

fn main() {
    let n: usize = std::env::args().nth(1).map_or(128, |s| s.parse().unwrap());
    let kin = std::env::args().nth(2).unwrap_or_else(|| "finite".into());
    let cfg: GammaConfig = serde_json::from_value(serde_json::json!({
        "current": {"nodes": [[0.5, 0.5, 0.0], [0.5, 0.5, 1.0]], "segments": [{"a": 0, "b": 1, "theta": [1.0, 0.0, 0.0]}]},
        "box": {"L": 1.0, "n": n},
        "kinematics": kin,
        "p": 1.5,
        "eps_grid": [0.125, 0.0625, 0.03125, 0.015625]
    }))
    .unwrap();
    let start = std::time::Instant::now();
    let t = gamma_table(&cfg).unwrap();
    print!("{}", t.to_csv());
    println!("{}", serde_json::to_string_pretty(&t.summary).unwrap());
    println!("elapsed {:?}", start.elapsed());
}
