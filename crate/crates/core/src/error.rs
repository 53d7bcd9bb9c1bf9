use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid boundary: {0}")]
    InvalidBoundary(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("reflection angle left (0, π): {0}")]
    Branch(String),

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("tangential or outward collision (θ' = {theta})")]
    OutwardCollision { theta: f64 },

    #[error("particle speed {speed:e} is not above twice the boundary speed {boundary_speed:e}")]
    LowEnergy { speed: f64, boundary_speed: f64 },

    #[error("degenerate critical point of a/b near t = {t}")]
    DegenerateCriticalPoint { t: f64 },

    #[error("point (E = {energy:e}, t = {t}) is outside the scattering domain")]
    OutsideScatteringDomain { energy: f64, t: f64 },

    #[error("physical energy {energy:e} is below the configured floor {floor:e}")]
    BelowEnergyFloor { energy: f64, floor: f64 },

    #[error("no switching band near t* = {t_star} at this energy")]
    EmptyBand { t_star: f64 },
}
