//! Steady transonic shock flow through a straight two-dimensional duct.
//!
//! The duct is the strip `(-1, X_exit) x (0, 1)` with impermeable walls.  A
//! uniform supersonic stream enters at `x1 = -1`, passes through a normal (or
//! slightly curved) shock front `x1 = f(x2)`, and leaves subsonically at the
//! exit, where the speed is prescribed.  The crate provides
//!
//! * isentropic/isothermal gas closures relating density, speed and sound
//!   speed on a Bernoulli level ([`gas`]),
//! * the normal-shock jump relations and their unique subsonic root
//!   ([`jump`]),
//! * a shock-fitted curvilinear grid and potential-field container
//!   ([`grid`]),
//! * a Newton solver for the subsonic potential problem downstream of a fixed
//!   front ([`solver`]),
//! * a free-boundary iteration that moves the front until the flux mismatch
//!   across it vanishes, together with sweep and long-duct experiment drivers
//!   ([`free_boundary`]),
//! * diagnostics comparing a computed field against the closed-form flat-shock
//!   family ([`comparison`]).

pub mod comparison;
pub mod error;
pub mod free_boundary;
pub mod gas;
pub mod grid;
pub mod jump;
mod linalg;
pub mod solver;

pub use error::{Error, Result};
pub use free_boundary::{
    ExperimentConfig, ExitSpeed, FlatShockSolution, TransonicResult, UniformSupersonicFlow,
    Verdict,
};
pub use gas::{FlowState, GasModel};
pub use grid::{MappedGrid, PotentialField, ShockFront};
pub use jump::JumpSolution;
pub use solver::{SolveReport, SolverOptions};
