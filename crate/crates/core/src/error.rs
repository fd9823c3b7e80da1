//! Shared error type for the duct-flow crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid gas model: {0}")]
    InvalidGasModel(String),

    /// Speed at or beyond the vacuum limit `q_max`; the density inversion has
    /// no admissible value there.
    #[error("speed {speed} exceeds the admissible limit {limit}")]
    SpeedExceedsLimit { speed: f64, limit: f64 },

    #[error("density {0} is not positive")]
    NonpositiveDensity(f64),

    /// `gamma = 1` has unbounded admissible speed; `q_max` does not exist.
    #[error("maximum speed is unbounded for the isothermal exponent gamma = 1")]
    UnboundedForIsothermal,

    /// Upstream state must be strictly supersonic, `u > c*`.
    #[error("speed {speed} is not strictly supersonic (critical speed {critical})")]
    NotSupersonic { speed: f64, critical: f64 },

    #[error("normal vector has length {0}, expected a unit vector")]
    NonUnitNormal(f64),

    /// Front violates the geometry invariants (entry/exit bounds, or the
    /// mapped-grid Jacobian would degenerate).
    #[error("degenerate shock front: {0}")]
    DegenerateFront(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("Newton iteration diverged after {iterations} steps (residual {residual:.3e})")]
    NewtonDiverged { iterations: usize, residual: f64 },

    /// An accepted iterate lost uniform ellipticity: the margin
    /// `rho (1 - M^2)` fell below the configured floor somewhere.
    #[error("ellipticity margin {margin:.3e} fell below the floor {floor:.3e}")]
    SonicDegeneracy { margin: f64, floor: f64 },

    /// The exit condition `d(phi)/dx1 = sqrt(c1^2 - (d(phi)/dx2)^2)` has no
    /// real root because the cross-stream speed reached `c1`.
    #[error("exit condition infeasible: |cross-stream speed| {cross:.6} >= exit speed {c1:.6}")]
    ExitConditionInfeasible { cross: f64, c1: f64 },

    #[error("linear solve failed: {0}")]
    LinearSolveFailed(String),

    #[error("station x1 = {0} lies outside the subsonic region")]
    StationOutsideRegion(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Diagnostic requested on a run that did not converge.
    #[error("diagnostic requires a converged run, got verdict {0}")]
    NotConverged(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
