//! Flat `key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment, unknown keys are rejected so
//! a typo cannot silently fall back to a default.

use std::fmt;
use std::path::Path;

use transonic_core::{ExitSpeed, ExperimentConfig, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExitChoice {
    /// Use the subsonic speed behind the normal shock.
    Auto,
    Given(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expect {
    Any,
    Converged,
    NoSolution,
}

impl fmt::Display for Expect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Expect::Any => "any",
            Expect::Converged => "converged",
            Expect::NoSolution => "nosolution",
        })
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub gamma: f64,
    pub b0: f64,
    pub u_minus: f64,
    pub c1: ExitChoice,
    pub x_exit: f64,
    pub l_list: Vec<f64>,
    pub n_xi: usize,
    pub n_eta: usize,
    pub t0: f64,
    pub perturb_amp: f64,
    pub perturb_modes: usize,
    pub front_tol: f64,
    pub newton_tol: f64,
    pub stagnation_tol: f64,
    pub max_outer: usize,
    pub max_newton: usize,
    pub step_scale: f64,
    pub max_step: f64,
    pub stall_window: usize,
    pub jump_tol: f64,
    pub drift_guard: f64,
    pub margin_floor: f64,
    pub seed: u64,
    pub expect: Expect,
}

impl Default for RunConfig {
    fn default() -> Self {
        let outer = ExperimentConfig::default();
        let newton = SolverOptions::default();
        RunConfig {
            gamma: 1.4,
            b0: 2.0,
            u_minus: 2.0,
            c1: ExitChoice::Auto,
            x_exit: 2.0,
            l_list: vec![4.0, 8.0, 16.0],
            n_xi: 33,
            n_eta: 33,
            t0: 0.5,
            perturb_amp: 0.0,
            perturb_modes: 0,
            front_tol: outer.front_tol,
            newton_tol: newton.newton_tol,
            stagnation_tol: newton.stagnation_tol,
            max_outer: outer.max_outer,
            max_newton: newton.max_newton,
            step_scale: outer.step_scale,
            max_step: outer.max_step,
            stall_window: outer.stall_window,
            jump_tol: outer.jump_tol,
            drift_guard: outer.drift_guard,
            margin_floor: newton.margin_floor,
            seed: 0,
            expect: Expect::Any,
        }
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64, String> {
    let v: f64 = value
        .parse()
        .map_err(|_| format!("{key}: expected a number, got `{value}`"))?;
    if !v.is_finite() {
        return Err(format!("{key}: value must be finite"));
    }
    Ok(v)
}

fn parse_usize(key: &str, value: &str) -> Result<usize, String> {
    value
        .parse()
        .map_err(|_| format!("{key}: expected a non-negative integer, got `{value}`"))
}

impl RunConfig {
    /// Apply one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "gas.gamma" => self.gamma = parse_f64(key, value)?,
            "gas.b0" => self.b0 = parse_f64(key, value)?,
            "flow.u_minus" => self.u_minus = parse_f64(key, value)?,
            "flow.c1" => {
                self.c1 = if value == "auto" {
                    ExitChoice::Auto
                } else {
                    ExitChoice::Given(parse_f64(key, value)?)
                }
            }
            "duct.x_exit" => self.x_exit = parse_f64(key, value)?,
            "duct.l_list" => {
                let list: Result<Vec<f64>, String> =
                    value.split(',').map(|s| parse_f64(key, s.trim())).collect();
                let list = list?;
                if list.is_empty() {
                    return Err(format!("{key}: empty list"));
                }
                self.l_list = list;
            }
            "grid.n_xi" => self.n_xi = parse_usize(key, value)?,
            "grid.n_eta" => self.n_eta = parse_usize(key, value)?,
            "front.t0" => self.t0 = parse_f64(key, value)?,
            "front.perturb_amp" => self.perturb_amp = parse_f64(key, value)?,
            "front.perturb_modes" => self.perturb_modes = parse_usize(key, value)?,
            "solver.front_tol" => self.front_tol = parse_f64(key, value)?,
            "solver.newton_tol" => self.newton_tol = parse_f64(key, value)?,
            "solver.stagnation_tol" => self.stagnation_tol = parse_f64(key, value)?,
            "solver.max_outer" => self.max_outer = parse_usize(key, value)?,
            "solver.max_newton" => self.max_newton = parse_usize(key, value)?,
            "solver.step_scale" => self.step_scale = parse_f64(key, value)?,
            "solver.max_step" => self.max_step = parse_f64(key, value)?,
            "solver.stall_window" => self.stall_window = parse_usize(key, value)?,
            "solver.jump_tol" => self.jump_tol = parse_f64(key, value)?,
            "solver.drift_guard" => self.drift_guard = parse_f64(key, value)?,
            "solver.margin_floor" => self.margin_floor = parse_f64(key, value)?,
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| format!("seed: expected an integer, got `{value}`"))?
            }
            "expect" => {
                self.expect = match value {
                    "any" => Expect::Any,
                    "converged" => Expect::Converged,
                    "nosolution" => Expect::NoSolution,
                    other => {
                        return Err(format!(
                            "expect: `{other}` is not one of any|converged|nosolution"
                        ))
                    }
                }
            }
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    /// Apply a whole file of assignments.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            self.apply_assignment(line)
                .map_err(|e| format!("{}:{}: {e}", path.display(), lineno + 1))?;
        }
        Ok(())
    }

    /// Apply one `key=value` string, as used by `--override`.
    pub fn apply_assignment(&mut self, text: &str) -> Result<(), String> {
        let (key, value) = text
            .split_once('=')
            .ok_or_else(|| format!("`{text}` is not of the form key=value"))?;
        self.set(key.trim(), value.trim())
    }

    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            n_xi: self.n_xi,
            exit_speed: match self.c1 {
                ExitChoice::Auto => ExitSpeed::Matched,
                ExitChoice::Given(v) => ExitSpeed::Given(v),
            },
            front_tol: self.front_tol,
            max_outer: self.max_outer,
            step_scale: self.step_scale,
            stall_window: self.stall_window,
            pin_mean: Some(self.t0),
            jump_tol: self.jump_tol,
            max_step: self.max_step,
            drift_guard: self.drift_guard,
            solver: SolverOptions {
                newton_tol: self.newton_tol,
                stagnation_tol: self.stagnation_tol,
                max_newton: self.max_newton,
                margin_floor: self.margin_floor,
                ..SolverOptions::default()
            },
        }
    }
}
