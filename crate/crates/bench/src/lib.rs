//! Shared fixtures for the criterion benches.

use transonic_core::free_boundary::{seeded_perturbation, UniformSupersonicFlow};
use transonic_core::{ExperimentConfig, GasModel, ShockFront};

pub const GAMMA: f64 = 1.4;
pub const B0: f64 = 2.0;
pub const U_MINUS: f64 = 2.0;
pub const X_EXIT: f64 = 2.0;

pub fn standard_gas() -> GasModel {
    GasModel::new(GAMMA, B0).unwrap()
}

pub fn standard_flow() -> UniformSupersonicFlow {
    UniformSupersonicFlow::new(standard_gas(), U_MINUS).unwrap()
}

/// Gently curved front, the usual starting point for a free-boundary run.
pub fn perturbed_front(n_eta: usize) -> ShockFront {
    seeded_perturbation(0.5, 0.02, 2, n_eta, X_EXIT, 3).unwrap()
}

pub fn bench_config(n_xi: usize) -> ExperimentConfig {
    ExperimentConfig {
        n_xi,
        pin_mean: Some(0.5),
        ..ExperimentConfig::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use transonic_core::Verdict;

    #[test]
    fn fixtures_produce_a_converged_run() {
        let flow = standard_flow();
        let front = perturbed_front(17);
        let result =
            transonic_core::free_boundary::solve_transonic(&flow, &front, &bench_config(17))
                .unwrap();
        assert_eq!(result.verdict, Verdict::Converged);
    }
}
