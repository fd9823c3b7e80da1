//! Normal-shock jump relations on a fixed Bernoulli level.
//!
//! Mass flux `rho(q) q` rises from 0 to its peak at the critical speed `c*`
//! and falls again on the supersonic side.  A supersonic upstream speed
//! `u- > c*` therefore pairs with exactly one subsonic speed `u+ < c*`
//! carrying the same flux; that pair is the normal shock.  The entropy
//! condition selects the compression branch `rho+ > rho-`.

use crate::error::{Error, Result};
use crate::gas::GasModel;

/// Axial mass flux `rho(q) q` carried by a uniform stream at speed `q`.
pub fn mass_flux(gas: &GasModel, q: f64) -> Result<f64> {
    Ok(gas.density_from_speed(q)? * q)
}

/// `d(rho q)/dq = rho (1 - M^2)`; positive below `c*`, negative above.
pub fn mass_flux_derivative(gas: &GasModel, q: f64) -> Result<f64> {
    let rho = gas.density_from_speed(q)?;
    let c = gas.sound_speed(rho)?;
    Ok(rho * (1.0 - (q / c) * (q / c)))
}

/// Upstream/downstream states joined by a normal shock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpSolution {
    pub u_minus: f64,
    pub rho_minus: f64,
    pub u_plus: f64,
    pub rho_plus: f64,
}

impl JumpSolution {
    /// `rho- u- - rho+ u+`; vanishes for solver output.
    pub fn mass_flux_mismatch(&self) -> f64 {
        self.rho_minus * self.u_minus - self.rho_plus * self.u_plus
    }

    /// Both sides sit on the same Bernoulli level; returns the difference of
    /// the two Bernoulli residuals.
    pub fn bernoulli_mismatch(&self, gas: &GasModel) -> f64 {
        gas.bernoulli_residual(self.u_minus, self.rho_minus)
            - gas.bernoulli_residual(self.u_plus, self.rho_plus)
    }

    pub fn entropy_satisfied(&self) -> bool {
        entropy_satisfied(self)
    }
}

/// Compression condition `rho+ > rho-` (strict).
pub fn entropy_satisfied(sol: &JumpSolution) -> bool {
    sol.rho_plus > sol.rho_minus
}

const BISECTION_TOL: f64 = 1e-12;
const NEAR_SONIC: f64 = 1e-8;

/// Unique subsonic speed carrying the same mass flux as the supersonic
/// upstream speed `u_minus`.
///
/// Bisection on `(0, c*)` to 1e-12 followed by three Newton corrections.
/// Upstream speeds within 1e-8 of `c*` return the sonic (zero-strength)
/// state directly; note entropy is not strict there.
pub fn solve_normal_shock(gas: &GasModel, u_minus: f64) -> Result<JumpSolution> {
    let cstar = gas.critical_speed();
    if u_minus <= cstar {
        return Err(Error::NotSupersonic {
            speed: u_minus,
            critical: cstar,
        });
    }
    if !gas.is_isothermal() {
        let qmax = gas.max_speed()?;
        if u_minus >= qmax {
            return Err(Error::SpeedExceedsLimit {
                speed: u_minus,
                limit: qmax,
            });
        }
    }
    if u_minus - cstar < NEAR_SONIC {
        let rho = gas.density_from_speed(cstar)?;
        return Ok(JumpSolution {
            u_minus,
            rho_minus: gas.density_from_speed(u_minus)?,
            u_plus: cstar,
            rho_plus: rho,
        });
    }

    let rho_minus = gas.density_from_speed(u_minus)?;
    let target = rho_minus * u_minus;
    let u_plus = subsonic_flux_root(gas, target)?;
    Ok(JumpSolution {
        u_minus,
        rho_minus,
        u_plus,
        rho_plus: gas.density_from_speed(u_plus)?,
    })
}

/// Subsonic root of `rho(u) u = flux` on `(0, c*)`.
pub fn subsonic_flux_root(gas: &GasModel, flux: f64) -> Result<f64> {
    let cstar = gas.critical_speed();
    let peak = mass_flux(gas, cstar)?;
    if flux <= 0.0 || flux > peak {
        return Err(Error::InvalidConfig(format!(
            "flux {flux} outside the attainable range (0, {peak}]"
        )));
    }
    let f = |u: f64| mass_flux(gas, u).map(|v| v - flux);
    let root = bisect_then_polish(gas, f, 1e-12, cstar)?;
    Ok(root)
}

/// Supersonic root of `rho(u) u = flux` on `(c*, q_max)`; the other branch of
/// the same flux level, used to walk a jump back upstream.
pub fn supersonic_flux_root(gas: &GasModel, flux: f64) -> Result<f64> {
    let cstar = gas.critical_speed();
    let peak = mass_flux(gas, cstar)?;
    if flux <= 0.0 || flux > peak {
        return Err(Error::InvalidConfig(format!(
            "flux {flux} outside the attainable range (0, {peak}]"
        )));
    }
    // Flux decreases beyond c*; find an upper bracket with flux below target.
    let hi = if gas.is_isothermal() {
        let mut hi = 2.0 * cstar;
        while mass_flux(gas, hi)? > flux {
            hi *= 2.0;
        }
        hi
    } else {
        gas.max_speed()? - 1e-12
    };
    let f = |u: f64| mass_flux(gas, u).map(|v| flux - v);
    let root = bisect_then_polish_on(gas, f, cstar, hi, true)?;
    Ok(root)
}

fn bisect_then_polish(
    gas: &GasModel,
    f: impl Fn(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    bisect_then_polish_on(gas, f, lo, hi, false)
}

/// Bisection to `BISECTION_TOL`, then three Newton corrections using the
/// analytic flux derivative.  `decreasing` flips the sign convention of `f`.
fn bisect_then_polish_on(
    gas: &GasModel,
    f: impl Fn(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
    decreasing: bool,
) -> Result<f64> {
    let flo = f(lo)?;
    let fhi = f(hi)?;
    if flo > 0.0 || fhi < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "root not bracketed on [{lo}, {hi}]: f = [{flo}, {fhi}]"
        )));
    }
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid)? <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut u = 0.5 * (lo + hi);
    for _ in 0..3 {
        let val = f(u)?;
        let mut der = mass_flux_derivative(gas, u)?;
        if decreasing {
            der = -der;
        }
        if der.abs() < 1e-300 {
            break;
        }
        let next = u - val / der;
        if next.is_finite() && next > lo - 1e-9 && next < hi + 1e-9 {
            u = next;
        }
    }
    Ok(u)
}

/// Flux mismatch `rho(|g+|^2) g+ . n - rho(|g-|^2) g- . n` across a surface
/// with unit normal `n`.  Vanishing mismatch is the mass-conservation part of
/// the shock conditions.
pub fn rh_flux_residual(
    gas: &GasModel,
    grad_plus: [f64; 2],
    grad_minus: [f64; 2],
    normal: [f64; 2],
) -> Result<f64> {
    let len = (normal[0] * normal[0] + normal[1] * normal[1]).sqrt();
    if (len - 1.0).abs() > 1e-12 {
        return Err(Error::NonUnitNormal(len));
    }
    let qp2 = grad_plus[0] * grad_plus[0] + grad_plus[1] * grad_plus[1];
    let qm2 = grad_minus[0] * grad_minus[0] + grad_minus[1] * grad_minus[1];
    let rp = gas.density_from_q2(qp2)?;
    let rm = gas.density_from_q2(qm2)?;
    Ok(rp * (grad_plus[0] * normal[0] + grad_plus[1] * normal[1])
        - rm * (grad_minus[0] * normal[0] + grad_minus[1] * normal[1]))
}
