//! Free-boundary iteration for the transonic shock.
//!
//! A uniform supersonic stream enters the duct; the shock front is an
//! unknown curve behind which the flow is subsonic.  The front is advanced
//! until the normal mass flux is continuous across it.  The update is
//! preconditioned mode by mode: the front residual is decomposed in cosine
//! modes over the cross-section, each shape mode is scaled by its linearized
//! gain (which grows like the mode frequency), and the mean mode, which only
//! translates the front, is either pinned or allowed to drift.
//!
//! The drift is the non-existence signal: when the prescribed exit speed is
//! incompatible with the upstream state, the mean residual cannot be reduced
//! by any front position and the front translates monotonically until the
//! iteration reports `NoSolution`.

use crate::error::{Error, Result};
use crate::gas::GasModel;
use crate::grid::{MappedGrid, PotentialField, ShockFront};
use crate::jump::{self, JumpSolution};
use crate::solver::{self, SolverOptions};
use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Incoming uniform stream; must be supersonic and below the speed limit.
#[derive(Debug, Clone, Copy)]
pub struct UniformSupersonicFlow {
    gas: GasModel,
    u_minus: f64,
    rho_minus: f64,
}

impl UniformSupersonicFlow {
    pub fn new(gas: GasModel, u_minus: f64) -> Result<Self> {
        let cstar = gas.critical_speed();
        if !(u_minus > cstar) {
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
        let rho_minus = gas.density_from_speed(u_minus)?;
        Ok(UniformSupersonicFlow {
            gas,
            u_minus,
            rho_minus,
        })
    }

    pub fn gas(&self) -> &GasModel {
        &self.gas
    }

    pub fn u_minus(&self) -> f64 {
        self.u_minus
    }

    pub fn rho_minus(&self) -> f64 {
        self.rho_minus
    }

    pub fn mass_flux(&self) -> f64 {
        self.rho_minus * self.u_minus
    }

    pub fn normal_shock(&self) -> Result<JumpSolution> {
        jump::solve_normal_shock(&self.gas, self.u_minus)
    }

    /// Upstream potential `u_minus x1`.
    pub fn potential(&self, x1: f64) -> f64 {
        self.u_minus * x1
    }
}

/// Member of the one-parameter family of flat-front solutions: front at
/// `x1 = t`, uniform subsonic state downstream.
#[derive(Debug, Clone, Copy)]
pub struct FlatShockSolution {
    u_minus: f64,
    t: f64,
    jump: JumpSolution,
}

impl FlatShockSolution {
    pub fn new(flow: &UniformSupersonicFlow, t: f64) -> Result<Self> {
        Ok(FlatShockSolution {
            u_minus: flow.u_minus(),
            t,
            jump: flow.normal_shock()?,
        })
    }

    pub fn front_position(&self) -> f64 {
        self.t
    }

    pub fn u_plus(&self) -> f64 {
        self.jump.u_plus
    }

    pub fn rho_plus(&self) -> f64 {
        self.jump.rho_plus
    }

    /// Shift the front; the downstream potential changes by the constant
    /// `(u_minus - u_plus) s` at every fixed point.
    pub fn translated(&self, s: f64) -> Self {
        FlatShockSolution {
            t: self.t + s,
            ..*self
        }
    }

    pub fn potential_downstream(&self, x1: f64) -> f64 {
        self.u_minus * self.t + self.jump.u_plus * (x1 - self.t)
    }

    pub fn potential_upstream(&self, x1: f64) -> f64 {
        self.u_minus * x1
    }

    /// Downstream potential sampled at the nodes of an arbitrary mapped grid.
    pub fn sample(&self, grid: &MappedGrid) -> Array2<f64> {
        let mut out = Array2::zeros((grid.n_xi(), grid.n_eta()));
        for i in 0..grid.n_xi() {
            for j in 0..grid.n_eta() {
                out[[i, j]] = self.potential_downstream(grid.x1(i, j));
            }
        }
        out
    }

    /// The solution as a discrete field on its own flat-front grid.
    pub fn field(&self, n_xi: usize, n_eta: usize, x_exit: f64) -> Result<PotentialField> {
        let front = ShockFront::flat(self.t, n_eta, x_exit)?;
        let grid = MappedGrid::new(&front, n_xi)?;
        let values = self.sample(&grid);
        PotentialField::new(grid, values)
    }
}

/// Exit-plane speed: matched to the normal-shock value, or prescribed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExitSpeed {
    Matched,
    Given(f64),
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub n_xi: usize,
    pub exit_speed: ExitSpeed,
    /// Max-norm tolerance on the front residual.
    pub front_tol: f64,
    pub max_outer: usize,
    /// Multiplier on the preconditioned update.
    pub step_scale: f64,
    /// Iterations before a persistent mean residual is declared a stall.
    pub stall_window: usize,
    /// Pin the front mean at this station when the exit speed matches the
    /// normal-shock value; selects one member of the translation family.
    pub pin_mean: Option<f64>,
    /// Exit speeds within this distance of the normal-shock value count as
    /// matched.
    pub jump_tol: f64,
    /// Clamp on the front move per iteration.
    pub max_step: f64,
    /// Distance from the duct ends at which a drifting mean aborts the run.
    pub drift_guard: f64,
    pub solver: SolverOptions,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_xi: 33,
            exit_speed: ExitSpeed::Matched,
            front_tol: 1e-8,
            max_outer: 500,
            step_scale: 1.0,
            stall_window: 20,
            pin_mean: None,
            jump_tol: 1e-8,
            max_step: 0.1,
            drift_guard: 0.25,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Converged,
    NoSolution,
    MaxIter,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Converged => "converged",
            Verdict::NoSolution => "no_solution",
            Verdict::MaxIter => "max_iter",
        })
    }
}

#[derive(Debug, Clone)]
pub struct TransonicResult {
    pub verdict: Verdict,
    pub front: ShockFront,
    pub field: PotentialField,
    /// Front updates performed.
    pub iterations: usize,
    pub c1: f64,
    pub u_plus: f64,
    /// Spread of the final front.
    pub final_flatness: f64,
    pub front_mean: f64,
    /// Trapezoid mean of the final front residual.
    pub mean_residual: f64,
    /// Max deviation of the final front residual from its mean.
    pub osc_residual: f64,
    pub min_mach_margin: f64,
    pub entropy_ok: bool,
    /// Max-norm of the front residual per outer iteration.
    pub residual_history: Vec<f64>,
    /// Mean front residual per outer iteration.
    pub mean_history: Vec<f64>,
    /// Max deviation from the mean per outer iteration.
    pub osc_history: Vec<f64>,
}

fn trapezoid_mean(r: &[f64]) -> f64 {
    let m = r.len();
    let mut s = 0.5 * (r[0] + r[m - 1]);
    for &v in &r[1..m - 1] {
        s += v;
    }
    s / (m - 1) as f64
}

/// Mean front residual of a flat front, independent of its position: the
/// mass-flux difference between the exit state and the incoming stream.
pub fn flat_front_mean_residual(flow: &UniformSupersonicFlow, c1: f64) -> Result<f64> {
    Ok(jump::mass_flux(flow.gas(), c1)? - flow.mass_flux())
}

/// Deterministic perturbed front: cosine modes `1..=modes` with seeded
/// amplitudes, rescaled so the perturbation peak is exactly `amp`.  Cosine
/// modes keep the trapezoid mean at `t0` exactly.
pub fn seeded_perturbation(
    t0: f64,
    amp: f64,
    modes: usize,
    n_eta: usize,
    x_exit: f64,
    seed: u64,
) -> Result<ShockFront> {
    if amp == 0.0 || modes == 0 {
        return ShockFront::flat(t0, n_eta, x_exit);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coefs: Vec<f64> = (0..modes).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let h = 1.0 / (n_eta - 1) as f64;
    let mut raw = vec![0.0; n_eta];
    for (j, r) in raw.iter_mut().enumerate() {
        let eta = j as f64 * h;
        for (k, &c) in coefs.iter().enumerate() {
            *r += c * ((k + 1) as f64 * std::f64::consts::PI * eta).cos();
        }
    }
    let peak = raw.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let scale = if peak > 0.0 { amp / peak } else { 0.0 };
    let vals: Vec<f64> = raw.iter().map(|&v| t0 + scale * v).collect();
    ShockFront::new(vals, x_exit)
}

/// Cosine-mode coefficients of a cross-section sample: `r_j = sum_k a_k
/// cos(k pi eta_j)`.  Exact on the closed uniform grid.
fn dct_coefficients(r: &[f64]) -> Vec<f64> {
    let m = r.len();
    let nn = (m - 1) as f64;
    let mut a = vec![0.0; m];
    for (k, ak) in a.iter_mut().enumerate() {
        let mut s = 0.0;
        for (j, &rj) in r.iter().enumerate() {
            let w = if j == 0 || j == m - 1 { 0.5 } else { 1.0 };
            s += w * rj * (k as f64 * std::f64::consts::PI * j as f64 / nn).cos();
        }
        let norm = if k == 0 || k == m - 1 { 1.0 } else { 2.0 };
        *ak = s * norm / nn;
    }
    a
}

/// Linearized gain of shape mode `k`: a front bump of that mode changes the
/// front residual by `-gain` times the bump.  `kappa0` is the mass-flux
/// slope factor `rho (1 - M^2)` at the exit state, `msq` its squared Mach
/// number, `ell` the mean front-to-exit distance.
fn mode_gain(k: usize, h_eta: f64, kappa0: f64, du: f64, msq: f64, ell: f64) -> f64 {
    // discrete mode frequency of the centered second difference
    let keff = (2.0 / h_eta) * (0.5 * k as f64 * std::f64::consts::PI * h_eta).sin();
    let sigma = keff / (1.0 - msq).sqrt();
    kappa0 * du * sigma * (sigma * ell).tanh()
}

/// Run the free-boundary iteration from an initial front.
pub fn solve_transonic(
    flow: &UniformSupersonicFlow,
    front0: &ShockFront,
    cfg: &ExperimentConfig,
) -> Result<TransonicResult> {
    let gas = *flow.gas();
    let u_minus = flow.u_minus();
    let shock = flow.normal_shock()?;
    let u_plus = shock.u_plus;
    let c1 = match cfg.exit_speed {
        ExitSpeed::Matched => u_plus,
        ExitSpeed::Given(v) => v,
    };
    let pinning = cfg.pin_mean.is_some() && (c1 - u_plus).abs() <= cfg.jump_tol;

    let rho_c1 = gas.density_from_speed(c1)?;
    let mach_c1 = gas.mach(c1)?;
    if mach_c1 >= 1.0 {
        return Err(Error::SonicDegeneracy {
            margin: 1.0 - mach_c1,
            floor: cfg.solver.margin_floor,
        });
    }
    let msq = mach_c1 * mach_c1;
    let kappa0 = rho_c1 * (1.0 - msq);
    let du = u_minus - c1;

    let mut front = front0.clone();
    let m = front.n_eta();
    let h_eta = front.h_eta();
    let x_exit = front.x_exit();
    let mut warm: Option<Array2<f64>> = None;
    let mut residual_history = Vec::new();
    let mut mean_history = Vec::new();
    let mut osc_history = Vec::new();

    let mut iterations = 0usize;
    loop {
        let solved = match warm.as_ref() {
            Some(w) => match solver::solve_fixed_front(&gas, &front, u_minus, c1, cfg.n_xi, Some(w), &cfg.solver) {
                Ok(ok) => Ok(ok),
                // a large front move can make the warm guess inadmissible
                Err(_) => solver::solve_fixed_front(&gas, &front, u_minus, c1, cfg.n_xi, None, &cfg.solver),
            },
            // initial solve: a strongly tilted front meets the walls at an
            // angle and the corner flow can leave the subsonic regime before
            // any update happens.  Damp the shape toward its own mean (the
            // direction the iteration moves anyway) until a solvable front is
            // found, then iterate from there.
            None => match solver::solve_fixed_front(&gas, &front, u_minus, c1, cfg.n_xi, None, &cfg.solver) {
                Ok(ok) => Ok(ok),
                Err(first_err) => {
                    let mean = front.mean();
                    let base = front.values().to_vec();
                    let mut found = None;
                    let mut s = 0.5;
                    while s >= 1.0 / 128.0 {
                        let vals: Vec<f64> =
                            base.iter().map(|&f| mean + s * (f - mean)).collect();
                        if let Ok(damped) = ShockFront::new(vals, x_exit) {
                            if let Ok(ok) = solver::solve_fixed_front(
                                &gas,
                                &damped,
                                u_minus,
                                c1,
                                cfg.n_xi,
                                None,
                                &cfg.solver,
                            ) {
                                front = damped;
                                found = Some(ok);
                                break;
                            }
                        }
                        s *= 0.5;
                    }
                    found.ok_or(first_err)
                }
            },
        };
        let (field, report) = solved?;
        let r = solver::rh_residual_on_front(&gas, &field, u_minus)?;
        let rnorm = r.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        let rmean = trapezoid_mean(&r);
        let rosc = r.iter().fold(0.0f64, |a, &v| a.max((v - rmean).abs()));
        residual_history.push(rnorm);
        mean_history.push(rmean);
        osc_history.push(rosc);

        let finish = |verdict: Verdict,
                      front: ShockFront,
                      field: PotentialField,
                      entropy_ok: bool|
         -> TransonicResult {
            TransonicResult {
                verdict,
                final_flatness: front.flatness(),
                front_mean: front.mean(),
                front,
                field,
                iterations,
                c1,
                u_plus,
                mean_residual: rmean,
                osc_residual: rosc,
                min_mach_margin: report.min_mach_margin,
                entropy_ok,
                residual_history: residual_history.clone(),
                mean_history: mean_history.clone(),
                osc_history: osc_history.clone(),
            }
        };

        if rnorm < cfg.front_tol {
            // compressive jump: density must rise across the front
            let (_, density, _) = solver::flow_fields(&gas, &field)?;
            let front_density_min = (0..m).fold(f64::INFINITY, |a, j| a.min(density[[0, j]]));
            let entropy_ok = front_density_min > flow.rho_minus();
            let verdict = if entropy_ok {
                Verdict::Converged
            } else {
                Verdict::NoSolution
            };
            return Ok(finish(verdict, front, field, entropy_ok));
        }

        // a shape-converged residual whose mean refuses to shrink cannot be
        // fixed by any front: the exit speed is incompatible
        if iterations >= cfg.stall_window
            && rosc < cfg.front_tol
            && rmean.abs() > 0.5 * mean_history[0].abs()
        {
            return Ok(finish(Verdict::NoSolution, front, field, false));
        }

        let mean_now = front.mean();
        if mean_now < -1.0 + cfg.drift_guard || mean_now > x_exit - cfg.drift_guard {
            return Ok(finish(Verdict::NoSolution, front, field, false));
        }

        if iterations >= cfg.max_outer {
            return Ok(finish(Verdict::MaxIter, front, field, false));
        }

        // preconditioned update
        let a = dct_coefficients(&r);
        let ell = x_exit - mean_now;
        let mut delta = vec![0.0; m];
        let mean_term = if pinning { 0.0 } else { a[0] / kappa0 };
        for (j, d) in delta.iter_mut().enumerate() {
            let eta = j as f64 * h_eta;
            let mut s = mean_term;
            for (k, &ak) in a.iter().enumerate().skip(1) {
                s += ak * (k as f64 * std::f64::consts::PI * eta).cos()
                    / mode_gain(k, h_eta, kappa0, du, msq, ell);
            }
            *d = cfg.step_scale * s;
        }
        let peak = delta.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        if peak > cfg.max_step {
            let sc = cfg.max_step / peak;
            for d in delta.iter_mut() {
                *d *= sc;
            }
        }
        let mut vals: Vec<f64> = front
            .values()
            .iter()
            .zip(&delta)
            .map(|(&f, &d)| f + d)
            .collect();
        if pinning {
            let t0 = cfg.pin_mean.unwrap();
            let mut s = 0.5 * (vals[0] + vals[m - 1]);
            for &v in &vals[1..m - 1] {
                s += v;
            }
            let shift = t0 - s * h_eta;
            for v in vals.iter_mut() {
                *v += shift;
            }
        }
        front = match ShockFront::new(vals, x_exit) {
            Ok(f) => f,
            // the update pushed the front out of the duct: no solution there
            Err(_) => return Ok(finish(Verdict::NoSolution, front, field, false)),
        };
        warm = Some(field.values().clone());
        iterations += 1;
    }
}

/// One case of the existence/uniqueness check.
#[derive(Debug, Clone)]
pub struct TheoremCase {
    pub c1: f64,
    pub perturb_amp: f64,
    pub perturb_modes: usize,
    pub result: TransonicResult,
}

#[derive(Debug, Clone)]
pub struct TheoremCheck {
    pub u_plus: f64,
    pub cases: Vec<TheoremCase>,
    /// Every matched-exit case converged to a flat front.
    pub matched_all_converged: bool,
    /// No mismatched-exit case converged.
    pub mismatched_none_converged: bool,
}

/// Sweep exit-speed offsets and front perturbations and check that a shock
/// exists exactly when the exit speed matches the normal-shock value, with a
/// flat front in that case.
pub fn verify_finite_duct(
    flow: &UniformSupersonicFlow,
    cfg: &ExperimentConfig,
    t0: f64,
    n_eta: usize,
    x_exit: f64,
    offsets: &[f64],
    perturbations: &[(f64, usize)],
    seed: u64,
) -> Result<TheoremCheck> {
    let u_plus = flow.normal_shock()?.u_plus;
    let mut cases = Vec::new();
    let mut matched_ok = true;
    let mut mismatched_ok = true;
    for &off in offsets {
        for &(amp, modes) in perturbations {
            let front = seeded_perturbation(t0, amp, modes, n_eta, x_exit, seed)?;
            let mut case_cfg = cfg.clone();
            case_cfg.exit_speed = ExitSpeed::Given(u_plus + off);
            case_cfg.pin_mean = Some(t0);
            let result = solve_transonic(flow, &front, &case_cfg)?;
            let matched = off.abs() <= cfg.jump_tol;
            if matched {
                let flat = result.final_flatness < 1e-6;
                if result.verdict != Verdict::Converged || !flat {
                    matched_ok = false;
                }
            } else if result.verdict == Verdict::Converged {
                mismatched_ok = false;
            }
            cases.push(TheoremCase {
                c1: u_plus + off,
                perturb_amp: amp,
                perturb_modes: modes,
                result,
            });
        }
    }
    Ok(TheoremCheck {
        u_plus,
        cases,
        matched_all_converged: matched_ok,
        mismatched_none_converged: mismatched_ok,
    })
}

#[derive(Debug, Clone)]
pub struct LongDuctCase {
    pub x_exit: f64,
    pub result: TransonicResult,
}

/// Rerun the matched-exit problem in ducts of increasing length.  The shock
/// should persist at the pinned station with a flat front for every length.
pub fn long_duct_experiment(
    flow: &UniformSupersonicFlow,
    cfg: &ExperimentConfig,
    t0: f64,
    n_eta: usize,
    amp: f64,
    modes: usize,
    seed: u64,
    lengths: &[f64],
) -> Result<Vec<LongDuctCase>> {
    let mut out = Vec::new();
    for &x_exit in lengths {
        let front = seeded_perturbation(t0, amp, modes, n_eta, x_exit, seed)?;
        let mut case_cfg = cfg.clone();
        case_cfg.exit_speed = ExitSpeed::Matched;
        case_cfg.pin_mean = Some(t0);
        let result = solve_transonic(flow, &front, &case_cfg)?;
        out.push(LongDuctCase { x_exit, result });
    }
    Ok(out)
}
