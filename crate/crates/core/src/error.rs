use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid elasticity tensor: {0}")]
    InvalidTensor(String),
    #[error("not a rotation: {0}")]
    NotARotation(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("quadrature too coarse: energy changed by {change:e} when doubling to {quadrature} points")]
    Aliasing { change: f64, quadrature: usize },
    #[error("point {0:?} lies on the dislocation axis")]
    OnAxis([f64; 3]),
    #[error("point {0:?} lies outside the sampled domain")]
    OutsideDomain([f64; 3]),
    #[error("current is not divergence free: {0}")]
    NotDivergenceFree(String),
    #[error("not admissible: {0}")]
    NotAdmissible(String),
    #[error("ill-conditioned acoustic tensor at mode {mode:?} (condition {condition:e})")]
    IllConditioned { mode: [i64; 3], condition: f64 },
    #[error("too many candidates ({0}); lower the caps")]
    Blowup(usize),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
