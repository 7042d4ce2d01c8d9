//! Fixtures shared by the benchmarks.

use supplyfrag_core::{BetaParams, EconomyParams};

/// Moderate-correlation economy with `rc = 0.02`.
pub fn low_cost_economy(k: usize, mu0: f64, rho0: f64) -> EconomyParams {
    let base = BetaParams::new(mu0, rho0).expect("valid basal law");
    EconomyParams::new(k, 1.0, 0.04, base).expect("valid economy")
}

/// `n` evenly spaced points strictly inside `(0, 1)`.
pub fn unit_grid(n: usize) -> Vec<f64> {
    (1..=n).map(|i| i as f64 / (n + 1) as f64).collect()
}
