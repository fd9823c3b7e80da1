//! Numerical behavior of the fixed-front solver and the free-boundary loop:
//! mesh convergence order, exactness on uniform flows, conservation, and the
//! linearization identity evaluated on solver output.

use ndarray::Array2;
use transonic_core::comparison::{assemble_linearized, linearized_identity_residual};
use transonic_core::free_boundary::{seeded_perturbation, solve_transonic};
use transonic_core::grid::{MappedGrid, PotentialField, ShockFront};
use transonic_core::solver::{
    conservation_profile, residual_vector, solve_fixed_front,
};
use transonic_core::{
    ExperimentConfig, FlatShockSolution, GasModel, SolverOptions, UniformSupersonicFlow,
};

const U_MINUS: f64 = 2.0;
const U_PLUS: f64 = 0.4926387397751818;
const X_EXIT: f64 = 4.0;

fn gas() -> GasModel {
    GasModel::new(1.4, 2.0).unwrap()
}

fn flow() -> UniformSupersonicFlow {
    UniformSupersonicFlow::new(gas(), U_MINUS).unwrap()
}

fn cosine_front(m: usize, amp: f64) -> ShockFront {
    let h = 1.0 / (m - 1) as f64;
    let vals: Vec<f64> = (0..m)
        .map(|j| 0.4 + amp * (std::f64::consts::PI * j as f64 * h).cos())
        .collect();
    ShockFront::new(vals, X_EXIT).unwrap()
}

/// Fixed curved front, refined grids sharing every second node: the field
/// differences between levels must shrink at second order.
#[test]
fn mesh_convergence_is_second_order() {
    let gas = gas();
    let opts = SolverOptions::default();
    let sizes = [33usize, 65, 129];
    let mut fields = Vec::new();
    for &n in &sizes {
        let front = cosine_front(n, 0.05);
        let (field, report) =
            solve_fixed_front(&gas, &front, U_MINUS, U_PLUS, n, None, &opts).unwrap();
        // roundoff floor of the flux differences grows with resolution
        assert!(report.residual_norm < 1e-9, "n={n}");
        fields.push(field);
    }
    let diff = |coarse: &PotentialField, fine: &PotentialField| -> f64 {
        let (n, m) = coarse.values().dim();
        let mut e = 0.0f64;
        for i in 0..n {
            for j in 0..m {
                e = e.max((coarse.values()[[i, j]] - fine.values()[[2 * i, 2 * j]]).abs());
            }
        }
        e
    };
    let e1 = diff(&fields[0], &fields[1]);
    let e2 = diff(&fields[1], &fields[2]);
    let order = (e1 / e2).log2();
    assert!(
        order >= 1.8,
        "levels 33/65/129: errors {e1:.3e}, {e2:.3e}, order {order:.2}"
    );
}

/// A uniform subsonic stream sampled on a curved grid satisfies every
/// conservation, wall, and exit row of the discrete system exactly; only the
/// front rows see its data mismatch.
#[test]
fn uniform_flow_is_exact_away_from_the_front() {
    let gas = gas();
    let front = cosine_front(17, 0.06);
    let grid = MappedGrid::new(&front, 25).unwrap();
    let (n, m) = (25, 17);
    let flat = FlatShockSolution::new(&flow(), 0.34).unwrap();
    let field = PotentialField::new(grid, flat.sample(&MappedGrid::new(&front, 25).unwrap())).unwrap();
    let r = residual_vector(&gas, &field, U_MINUS, U_PLUS).unwrap();
    for i in 1..n {
        for j in 0..m {
            assert!(
                r[i * m + j].abs() < 1e-11,
                "row ({i},{j}): {}",
                r[i * m + j]
            );
        }
    }
}

#[test]
fn conservation_holds_on_curved_converged_fields() {
    let gas = gas();
    let front = cosine_front(33, 0.03);
    let opts = SolverOptions::default();
    let (field, _) = solve_fixed_front(&gas, &front, U_MINUS, U_PLUS, 65, None, &opts).unwrap();
    let profile = conservation_profile(&gas, &field).unwrap();
    let base = profile[0];
    for (i, &p) in profile.iter().enumerate() {
        assert!(
            ((p - base) / base).abs() < 1e-10,
            "layer {i}: {p:.14e} vs {base:.14e}"
        );
    }
}

#[test]
fn gradients_converge_at_second_order_on_curved_grids() {
    // smooth non-polynomial field; max gradient error halves twice per
    // refinement
    let mut errs = Vec::new();
    for &m in &[17usize, 33, 65] {
        let front = cosine_front(m, 0.05);
        let grid = MappedGrid::new(&front, m).unwrap();
        let mut phi = Array2::zeros((m, m));
        for i in 0..m {
            for j in 0..m {
                let (x1, x2) = (grid.x1(i, j), grid.x2(j));
                phi[[i, j]] = (0.8 * x1).sin() * (1.3 * x2).cos();
            }
        }
        let (g1, g2) = grid.physical_gradient(&phi);
        let mut e = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                let (x1, x2) = (grid.x1(i, j), grid.x2(j));
                let d1 = 0.8 * (0.8 * x1).cos() * (1.3 * x2).cos();
                let d2 = -1.3 * (0.8 * x1).sin() * (1.3 * x2).sin();
                e = e.max((g1[[i, j]] - d1).abs()).max((g2[[i, j]] - d2).abs());
            }
        }
        errs.push(e);
    }
    let o1 = (errs[0] / errs[1]).log2();
    let o2 = (errs[1] / errs[2]).log2();
    assert!(o1 > 1.8 && o2 > 1.8, "orders {o1:.2}, {o2:.2}, errors {errs:?}");
}

#[test]
fn free_boundary_runs_are_deterministic() {
    let flow = flow();
    let cfg = ExperimentConfig {
        n_xi: 17,
        pin_mean: Some(0.5),
        ..ExperimentConfig::default()
    };
    let front = seeded_perturbation(0.5, 0.02, 2, 9, X_EXIT, 12).unwrap();
    let a = solve_transonic(&flow, &front, &cfg).unwrap();
    let b = solve_transonic(&flow, &front, &cfg).unwrap();
    assert_eq!(a.verdict, b.verdict);
    assert_eq!(a.iterations, b.iterations);
    assert_eq!(a.front.values(), b.front.values());
    assert_eq!(a.field.values(), b.field.values());
}

/// The linearization identity must hold on real solver output, not just on
/// manufactured fields, and the principal part must stay elliptic there.
#[test]
fn linearization_identity_on_solver_snapshot() {
    let gas = gas();
    let flow = flow();
    let cfg = ExperimentConfig {
        n_xi: 21,
        pin_mean: Some(0.5),
        max_outer: 3,
        ..ExperimentConfig::default()
    };
    let front = seeded_perturbation(0.5, 0.05, 3, 11, X_EXIT, 4).unwrap();
    let snap = solve_transonic(&flow, &front, &cfg).unwrap();
    let grid = snap.field.grid().clone();
    let tau = (0..grid.n_eta()).fold(f64::INFINITY, |a, j| a.min(grid.front_value(j)));
    let flat = FlatShockSolution::new(&flow, tau).unwrap();
    let reference = PotentialField::new(grid.clone(), flat.sample(&grid)).unwrap();
    let coefs = assemble_linearized(&gas, &reference, &snap.field).unwrap();
    assert!(coefs.min_ellipticity > 0.0);
    // pointwise positive definiteness of the principal part
    for i in 0..grid.n_xi() {
        for j in 0..grid.n_eta() {
            let (a11, a12, a22) = (
                coefs.a11[[i, j]],
                coefs.a12[[i, j]],
                coefs.a22[[i, j]],
            );
            assert!(a11 > 0.0 && a11 * a22 - a12 * a12 > 0.0, "node ({i},{j})");
        }
    }
    let defect = linearized_identity_residual(&gas, &reference, &snap.field, &coefs).unwrap();
    for v in defect.iter() {
        assert!(v.abs() < 1e-8, "{v}");
    }
}

/// Newton residual histories shrink monotonically after the first step on a
/// mildly curved problem.
#[test]
fn newton_history_is_monotone() {
    let gas = gas();
    let front = cosine_front(17, 0.04);
    let opts = SolverOptions::default();
    let (_, report) = solve_fixed_front(&gas, &front, U_MINUS, U_PLUS, 25, None, &opts).unwrap();
    assert!(report.iterations >= 2);
    for w in report.residual_history.windows(2).skip(1) {
        assert!(w[1] < w[0], "history {:?}", report.residual_history);
    }
}
