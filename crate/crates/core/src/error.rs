use thiserror::Error;

use crate::classical::TurningPointReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("x = {x} lies outside the potential domain {domain}")]
    Domain { x: f64, domain: String },

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("no classical motion at E = {energy}")]
    NoClassicalMotion { energy: f64 },

    #[error("no bound states: {0}")]
    NoBoundStates(String),

    #[error("quadrature did not converge (estimate {estimate}, error bound {error})")]
    Quadrature { estimate: f64, error: f64 },

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("level n = {n} does not exist: {reason}")]
    LevelDoesNotExist { n: u32, reason: String },

    #[error(
        "multi-turning-point problem: unsupported ({} allowed regions at E = {energy})",
        report.regions.len()
    )]
    MultiTurningPoint {
        energy: f64,
        report: Box<TurningPointReport>,
    },

    #[error("allowed region at E = {energy} reaches a hard wall at x = {x}")]
    HardWall { energy: f64, x: f64 },

    #[error("action W(E) is not increasing between E = {lower} and E = {upper}")]
    NonMonotoneAction { lower: f64, upper: f64 },

    #[error("singular point at x = {x}: {reason}")]
    SingularPoint { x: f64, reason: String },

    #[error("normalization failed: {0}")]
    Normalization(String),

    #[error("potential not bounded below: {0}")]
    UnboundedBelow(String),

    #[error("reference oracle: {0}")]
    Oracle(String),
}
