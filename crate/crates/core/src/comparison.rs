//! Comparison of a computed field against the flat-front solution family.
//!
//! The central object is the deviation `psi = phi_flat - phi`, where
//! `phi_flat` is the flat-front solution anchored at the leftmost point of
//! the computed front.  On the front itself `psi` reduces to
//! `(u_plus - u_minus)(f - tau) <= 0` exactly, it vanishes at the anchor
//! point, and for an admissible subsonic flow its extrema sit on the
//! boundary of the region.
//!
//! The difference of the two nonlinear operators is rewritten, with secant
//! quotients of the density closure, as a second-order operator applied to
//! `psi`.  `assemble_linearized` builds those coefficients; the identity
//!
//! ```text
//!   sum_ik a_ik d_i d_k psi + sum_k b_k d_k psi  =  N[phi_flat] - N[phi]
//! ```
//!
//! then holds to roundoff at every node, and the principal part keeps the
//! ellipticity margin `rho (1 - M^2)` of the reference state.

use crate::error::{Error, Result};
use crate::free_boundary::{FlatShockSolution, UniformSupersonicFlow};
use crate::gas::GasModel;
use crate::grid::PotentialField;
use crate::solver;
use ndarray::Array2;

/// Location class of a grid node; corners outrank edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeTag {
    Interior,
    Front,
    Exit,
    Wall,
    Corner,
}

impl NodeTag {
    pub fn classify(i: usize, j: usize, n_xi: usize, n_eta: usize) -> Self {
        let on_xi = i == 0 || i == n_xi - 1;
        let on_eta = j == 0 || j == n_eta - 1;
        match (on_xi, on_eta) {
            (true, true) => NodeTag::Corner,
            (true, false) => {
                if i == 0 {
                    NodeTag::Front
                } else {
                    NodeTag::Exit
                }
            }
            (false, true) => NodeTag::Wall,
            (false, false) => NodeTag::Interior,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            NodeTag::Interior => "interior",
            NodeTag::Front => "front",
            NodeTag::Exit => "exit",
            NodeTag::Wall => "wall",
            NodeTag::Corner => "corner",
        }
    }

    fn priority(&self) -> u8 {
        match self {
            NodeTag::Corner => 4,
            NodeTag::Front => 3,
            NodeTag::Exit => 3,
            NodeTag::Wall => 2,
            NodeTag::Interior => 0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ExtremePoint {
    pub value: f64,
    pub i: usize,
    pub j: usize,
    pub tag: NodeTag,
}

/// Extrema of a node array.  A field whose range is at roundoff level is
/// reported as degenerate rather than pretending its extrema have locations.
#[derive(Debug, Clone, Copy)]
pub enum ExtremaReport {
    DegenerateConstantField { range: f64 },
    Extrema { max: ExtremePoint, min: ExtremePoint },
}

pub fn extrema_report(values: &Array2<f64>) -> ExtremaReport {
    let (n, m) = values.dim();
    let mut vmax = f64::NEG_INFINITY;
    let mut vmin = f64::INFINITY;
    let mut scale = 0.0f64;
    for &v in values.iter() {
        vmax = vmax.max(v);
        vmin = vmin.min(v);
        scale = scale.max(v.abs());
    }
    let range = vmax - vmin;
    if range < 1e-13 * (1.0 + scale) {
        return ExtremaReport::DegenerateConstantField { range };
    }
    // among nodes attaining the extreme value, prefer boundary locations
    let pick = |target: f64| -> ExtremePoint {
        let mut best: Option<ExtremePoint> = None;
        for i in 0..n {
            for j in 0..m {
                if values[[i, j]] == target {
                    let tag = NodeTag::classify(i, j, n, m);
                    let better = best
                        .as_ref()
                        .map_or(true, |b| tag.priority() > b.tag.priority());
                    if better {
                        best = Some(ExtremePoint {
                            value: target,
                            i,
                            j,
                            tag,
                        });
                    }
                }
            }
        }
        best.unwrap()
    };
    ExtremaReport::Extrema {
        max: pick(vmax),
        min: pick(vmin),
    }
}

/// Deviation from the flat-front solution anchored at the leftmost front
/// point of the field's own grid.
#[derive(Debug, Clone)]
pub struct PsiField {
    tau: f64,
    values: Array2<f64>,
}

impl PsiField {
    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, &v| a.max(v.abs()))
    }

    /// Values along the front layer.
    pub fn front_row(&self) -> Vec<f64> {
        (0..self.values.dim().1).map(|j| self.values[[0, j]]).collect()
    }
}

pub fn psi_field(flow: &UniformSupersonicFlow, field: &PotentialField) -> Result<PsiField> {
    let g = field.grid();
    let tau = (0..g.n_eta()).fold(f64::INFINITY, |a, j| a.min(g.front_value(j)));
    let flat = FlatShockSolution::new(flow, tau)?;
    let mut values = flat.sample(g);
    values -= field.values();
    Ok(PsiField { tau, values })
}

/// Gradient and second derivatives of a field, all as node arrays.  `k[d][c]`
/// is the derivative in direction `d` of gradient component `c`.
struct Derivatives {
    g1: Array2<f64>,
    g2: Array2<f64>,
    k11: Array2<f64>,
    k12: Array2<f64>,
    k21: Array2<f64>,
    k22: Array2<f64>,
}

fn derivatives(field: &PotentialField) -> Derivatives {
    let g = field.grid();
    let (g1, g2) = field.gradient();
    let (k11, k21) = g.physical_gradient(&g1);
    let (k12, k22) = g.physical_gradient(&g2);
    // k21 here is d2 of g1 and k12 is d1 of g2; relabel to k[direction][component]
    Derivatives {
        g1,
        g2,
        k11,
        k12: k21,
        k21: k12,
        k22,
    }
}

/// Nonlinear operator `div(rho grad phi)` collocated at the nodes:
/// `rho (k11 + k22) + 2 rho' sum_ik g_i k_ik g_k`.
pub fn node_operator(gas: &GasModel, field: &PotentialField) -> Result<Array2<f64>> {
    let d = derivatives(field);
    let (n, m) = field.values().dim();
    let mut out = Array2::zeros((n, m));
    for i in 0..n {
        for j in 0..m {
            let (u1, u2) = (d.g1[[i, j]], d.g2[[i, j]]);
            let rho = gas.density_from_q2(u1 * u1 + u2 * u2)?;
            let rp = gas.drho_dq2(rho);
            let lap = d.k11[[i, j]] + d.k22[[i, j]];
            let adv = u1 * d.k11[[i, j]] * u1
                + u1 * d.k12[[i, j]] * u2
                + u2 * d.k21[[i, j]] * u1
                + u2 * d.k22[[i, j]] * u2;
            out[[i, j]] = rho * lap + 2.0 * rp * adv;
        }
    }
    Ok(out)
}

/// Coefficients of the second-order operator equivalent to the difference of
/// the nonlinear operators at the two given fields.
#[derive(Debug, Clone)]
pub struct LinearizedCoefficients {
    pub a11: Array2<f64>,
    pub a12: Array2<f64>,
    pub a22: Array2<f64>,
    pub b1: Array2<f64>,
    pub b2: Array2<f64>,
    /// Smallest eigenvalue of the principal part over the nodes.
    pub min_ellipticity: f64,
}

fn d2rho_dq2(gas: &GasModel, rho: f64) -> f64 {
    if gas.is_isothermal() {
        0.25 * rho
    } else {
        0.25 * (2.0 - gas.gamma()) * rho.powf(3.0 - 2.0 * gas.gamma())
    }
}

fn check_same_grid(a: &PotentialField, b: &PotentialField) -> Result<()> {
    let (ga, gb) = (a.grid(), b.grid());
    if ga.n_xi() != gb.n_xi() || ga.n_eta() != gb.n_eta() || ga.x_exit() != gb.x_exit() {
        return Err(Error::InvalidGrid(
            "fields live on different grids".into(),
        ));
    }
    for j in 0..ga.n_eta() {
        if (ga.front_value(j) - gb.front_value(j)).abs() > 1e-13 {
            return Err(Error::InvalidGrid(
                "fields live on different fronts".into(),
            ));
        }
    }
    Ok(())
}

/// Build the coefficients for the pair `(reference, field)`.  With
/// `psi = reference - field`, the identity
/// `sum a_ik d_i d_k psi + sum b_k d_k psi = N[reference] - N[field]`
/// holds at every node to roundoff.  Secant quotients of `rho` and `rho'`
/// switch to the analytic derivative when the two speeds coincide to
/// roundoff.
pub fn assemble_linearized(
    gas: &GasModel,
    reference: &PotentialField,
    field: &PotentialField,
) -> Result<LinearizedCoefficients> {
    check_same_grid(reference, field)?;
    let da = derivatives(reference);
    let db = derivatives(field);
    let (n, m) = reference.values().dim();
    let mut a11 = Array2::zeros((n, m));
    let mut a12 = Array2::zeros((n, m));
    let mut a22 = Array2::zeros((n, m));
    let mut b1 = Array2::zeros((n, m));
    let mut b2 = Array2::zeros((n, m));
    let mut min_ell = f64::INFINITY;
    for i in 0..n {
        for j in 0..m {
            let (u1, u2) = (da.g1[[i, j]], da.g2[[i, j]]);
            let (v1, v2) = (db.g1[[i, j]], db.g2[[i, j]]);
            let sa = u1 * u1 + u2 * u2;
            let sb = v1 * v1 + v2 * v2;
            let rho_a = gas.density_from_q2(sa)?;
            let rho_b = gas.density_from_q2(sb)?;
            let rpa = gas.drho_dq2(rho_a);
            let (q_rho, q_rp) = if (sa - sb).abs() > 1e-12 * (1.0 + sa.abs()) {
                (
                    (rho_a - rho_b) / (sa - sb),
                    (rpa - gas.drho_dq2(rho_b)) / (sa - sb),
                )
            } else {
                (rpa, d2rho_dq2(gas, rho_a))
            };

            a11[[i, j]] = rho_a + 2.0 * rpa * u1 * u1;
            a12[[i, j]] = 2.0 * rpa * u1 * u2;
            a22[[i, j]] = rho_a + 2.0 * rpa * u2 * u2;
            // eigenvalues of the principal part: rho_a and rho_a (1 - M_a^2)
            min_ell = min_ell.min(rho_a + 2.0 * rpa * sa);

            let (k11, k12, k21, k22) = (
                db.k11[[i, j]],
                db.k12[[i, j]],
                db.k21[[i, j]],
                db.k22[[i, j]],
            );
            let tr = k11 + k22;
            let vkv = v1 * k11 * v1 + v1 * k12 * v2 + v2 * k21 * v1 + v2 * k22 * v2;
            // b_k = q_rho tr(K) (u+v)_k
            //     + 2 rho'(s_a) [ (u K)_k + (K v)_k ]
            //     + 2 q_rho' (u+v)_k (v K v)
            let uk1 = u1 * k11 + u2 * k21;
            let uk2 = u1 * k12 + u2 * k22;
            let kv1 = k11 * v1 + k12 * v2;
            let kv2 = k21 * v1 + k22 * v2;
            b1[[i, j]] = q_rho * tr * (u1 + v1) + 2.0 * rpa * (uk1 + kv1) + 2.0 * q_rp * (u1 + v1) * vkv;
            b2[[i, j]] = q_rho * tr * (u2 + v2) + 2.0 * rpa * (uk2 + kv2) + 2.0 * q_rp * (u2 + v2) * vkv;
        }
    }
    Ok(LinearizedCoefficients {
        a11,
        a12,
        a22,
        b1,
        b2,
        min_ellipticity: min_ell,
    })
}

/// Nodewise defect of the linearization identity; at roundoff level for any
/// pair of admissible fields on a shared grid.
pub fn linearized_identity_residual(
    gas: &GasModel,
    reference: &PotentialField,
    field: &PotentialField,
    coefs: &LinearizedCoefficients,
) -> Result<Array2<f64>> {
    check_same_grid(reference, field)?;
    let grid = reference.grid().clone();
    let psi_values = reference.values() - field.values();
    let psi = PotentialField::new(grid, psi_values)?;
    let dp = derivatives(&psi);
    let na = node_operator(gas, reference)?;
    let nb = node_operator(gas, field)?;
    let (n, m) = reference.values().dim();
    let mut out = Array2::zeros((n, m));
    for i in 0..n {
        for j in 0..m {
            let lhs = coefs.a11[[i, j]] * dp.k11[[i, j]]
                + coefs.a12[[i, j]] * (dp.k12[[i, j]] + dp.k21[[i, j]])
                + coefs.a22[[i, j]] * dp.k22[[i, j]]
                + coefs.b1[[i, j]] * dp.g1[[i, j]]
                + coefs.b2[[i, j]] * dp.g2[[i, j]];
            out[[i, j]] = lhs - (na[[i, j]] - nb[[i, j]]);
        }
    }
    Ok(out)
}

/// Spread (max minus min) of the flow speed along the vertical line
/// `x1 = station`.
pub fn cross_section_oscillation(
    gas: &GasModel,
    field: &PotentialField,
    station: f64,
) -> Result<f64> {
    Ok(oscillation_profile(gas, field, &[station])?[0])
}

/// Speed oscillation at several stations; the speed map is computed once.
pub fn oscillation_profile(
    gas: &GasModel,
    field: &PotentialField,
    stations: &[f64],
) -> Result<Vec<f64>> {
    let (speed, _, _) = solver::flow_fields(gas, field)?;
    stations
        .iter()
        .map(|&s| {
            let vals = field.station_values(&speed, s)?;
            let mx = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mn = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            Ok(mx - mn)
        })
        .collect()
}
