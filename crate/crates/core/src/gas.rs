//! Gas closures on a single Bernoulli level.
//!
//! All states share the Bernoulli constant `b0`:
//! `q^2 / 2 + i(rho) = b0`, with enthalpy `i(rho) = (rho^(gamma-1) - 1) /
//! (gamma - 1)` for `gamma > 1` and `i(rho) = ln rho` for `gamma = 1`.
//! Inverting the relation gives the density as a function of speed alone,
//! which is what the potential-flow equation needs.  Speeds are passed as
//! magnitudes `q >= 0`; flow direction is carried by gradient vectors
//! elsewhere.

use crate::error::{Error, Result};

/// Polytropic exponent and Bernoulli constant.  `gamma = 1` is the exact
/// isothermal branch, not a limit of the `gamma > 1` formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasModel {
    gamma: f64,
    b0: f64,
}

impl GasModel {
    /// `gamma >= 1`; for `gamma > 1` the Bernoulli level must satisfy
    /// `1 + (gamma - 1) b0 > 0` so that the rest state exists.  Any real `b0`
    /// is admissible for `gamma = 1`.
    pub fn new(gamma: f64, b0: f64) -> Result<Self> {
        if !gamma.is_finite() || !b0.is_finite() {
            return Err(Error::InvalidGasModel(format!(
                "gamma = {gamma}, b0 = {b0} must be finite"
            )));
        }
        if gamma < 1.0 {
            return Err(Error::InvalidGasModel(format!("gamma = {gamma} < 1")));
        }
        if gamma > 1.0 && 1.0 + (gamma - 1.0) * b0 <= 0.0 {
            return Err(Error::InvalidGasModel(format!(
                "1 + (gamma - 1) b0 = {} <= 0",
                1.0 + (gamma - 1.0) * b0
            )));
        }
        Ok(GasModel { gamma, b0 })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn b0(&self) -> f64 {
        self.b0
    }

    pub fn is_isothermal(&self) -> bool {
        self.gamma == 1.0
    }

    /// Density from squared speed.  Returns `SpeedExceedsLimit` strictly above
    /// `q_max`; exactly at `q_max` the density is 0 (vacuum limit).
    pub fn density_from_q2(&self, q2: f64) -> Result<f64> {
        debug_assert!(q2 >= 0.0, "squared speed must be nonnegative");
        if self.gamma == 1.0 {
            return Ok((self.b0 - 0.5 * q2).exp());
        }
        let gm1 = self.gamma - 1.0;
        let base = 1.0 + gm1 * (self.b0 - 0.5 * q2);
        if base < 0.0 {
            return Err(Error::SpeedExceedsLimit {
                speed: q2.sqrt(),
                limit: self.max_speed()?,
            });
        }
        Ok(base.powf(1.0 / gm1))
    }

    /// Density from speed magnitude `q >= 0`.
    pub fn density_from_speed(&self, q: f64) -> Result<f64> {
        debug_assert!(q >= 0.0, "speed must be a magnitude");
        self.density_from_q2(q * q)
    }

    /// Local sound speed `c(rho)`.  Requires `rho > 0`.
    pub fn sound_speed(&self, rho: f64) -> Result<f64> {
        if rho <= 0.0 {
            return Err(Error::NonpositiveDensity(rho));
        }
        if self.gamma == 1.0 {
            Ok(1.0)
        } else {
            Ok(rho.powf(0.5 * (self.gamma - 1.0)))
        }
    }

    /// Critical speed `c*`: the flow speed at which `q = c(rho(q))`.  Speeds
    /// below are subsonic, above supersonic; the mass flux `rho(q) q` peaks
    /// exactly there.
    pub fn critical_speed(&self) -> f64 {
        if self.gamma == 1.0 {
            1.0
        } else {
            ((2.0 / (self.gamma + 1.0)) * (1.0 + (self.gamma - 1.0) * self.b0)).sqrt()
        }
    }

    /// Vacuum speed limit `q_max` (density reaches 0).  Unbounded for
    /// `gamma = 1`.
    pub fn max_speed(&self) -> Result<f64> {
        if self.gamma == 1.0 {
            Err(Error::UnboundedForIsothermal)
        } else {
            Ok((2.0 * (self.b0 + 1.0 / (self.gamma - 1.0))).sqrt())
        }
    }

    /// Mach number `q / c(rho(q))` for admissible `q` strictly below the
    /// vacuum limit.
    pub fn mach(&self, q: f64) -> Result<f64> {
        let rho = self.density_from_speed(q)?;
        Ok(q / self.sound_speed(rho)?)
    }

    /// Enthalpy `i(rho)` appearing in the Bernoulli relation.  Finite at
    /// `rho = 0` for `gamma > 1` (value `-1/(gamma-1)`).
    pub fn enthalpy(&self, rho: f64) -> f64 {
        if self.gamma == 1.0 {
            rho.ln()
        } else {
            (rho.powf(self.gamma - 1.0) - 1.0) / (self.gamma - 1.0)
        }
    }

    /// `q^2/2 + i(rho) - b0`; vanishes for states produced by this module.
    pub fn bernoulli_residual(&self, q: f64, rho: f64) -> f64 {
        0.5 * q * q + self.enthalpy(rho) - self.b0
    }

    /// `d(rho)/d(q^2) = -rho / (2 c^2)`, written as `-rho^(2-gamma)/2` so the
    /// vacuum state stays finite for `gamma < 2`.
    pub fn drho_dq2(&self, rho: f64) -> f64 {
        if self.gamma == 1.0 {
            -0.5 * rho
        } else {
            -0.5 * rho.powf(2.0 - self.gamma)
        }
    }

    /// Ellipticity margin `rho (1 - M^2)` of the potential operator at squared
    /// speed `q2`: the smallest eigenvalue of `rho I + 2 rho' grad grad^T`.
    pub fn ellipticity_margin(&self, q2: f64) -> Result<f64> {
        let rho = self.density_from_q2(q2)?;
        if rho == 0.0 {
            return Ok(0.0);
        }
        let c2 = if self.gamma == 1.0 {
            1.0
        } else {
            rho.powf(self.gamma - 1.0)
        };
        Ok(rho * (1.0 - q2 / c2))
    }
}

/// A (speed, density) pair on the model's Bernoulli level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowState {
    pub speed: f64,
    pub density: f64,
}

impl FlowState {
    pub fn from_speed(gas: &GasModel, q: f64) -> Result<Self> {
        Ok(FlowState {
            speed: q,
            density: gas.density_from_speed(q)?,
        })
    }

    pub fn bernoulli_residual(&self, gas: &GasModel) -> f64 {
        gas.bernoulli_residual(self.speed, self.density)
    }
}
