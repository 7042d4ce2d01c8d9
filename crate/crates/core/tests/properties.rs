use proptest::prelude::*;
use supplyfrag_core::chain_dynamics::propagate_chain;
use supplyfrag_core::dist_core::{betapower_mean, eta, BetaParams, BetaPowerParams};
use supplyfrag_core::firm_policy::{
    marginal_profit_correlated, marginal_profit_uncorrelated, optimal_sourcing_correlated,
    optimal_sourcing_uncorrelated, EconomyParams,
};

fn mean_of(p: BetaParams, n: f64) -> f64 {
    betapower_mean(&BetaPowerParams::new(p, n).unwrap())
}

proptest! {
    #[test]
    fn eta_decreasing(mu in 0.02f64..0.98, rho in 0.001f64..0.99, upstream in 1u64..40) {
        let p = BetaParams::new(mu, rho).unwrap();
        let mut prev = eta(1, upstream, &p).unwrap();
        for s in 2..12 {
            let e = eta(s, upstream, &p).unwrap();
            prop_assert!(e < prev, "s={} {} !< {}", s, e, prev);
            prev = e;
        }
    }

    #[test]
    fn moment_identity(mu in 0.02f64..0.98, rho in 0.001f64..0.99, upstream in 1u64..50, s in 1u64..20) {
        let p = BetaParams::new(mu, rho).unwrap();
        let lhs = mean_of(p, (upstream * s) as f64);
        prop_assume!(lhs > 1e-280);
        let rhs = eta(s, upstream, &p).unwrap() * mean_of(p, upstream as f64);
        prop_assert!(((lhs - rhs) / lhs).abs() < 1e-12, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn correlation_kills_diversification(mu in 0.05f64..0.95, s in 2u64..10, upstream in 1u64..10) {
        let etas: Vec<f64> = [0.9, 0.99, 0.999]
            .iter()
            .map(|&rho| eta(s, upstream, &BetaParams::new(mu, rho).unwrap()).unwrap())
            .collect();
        prop_assert!(etas[0] < etas[1] && etas[1] < etas[2] && etas[2] < 1.0, "{:?}", etas);
    }

    #[test]
    fn marginal_profits_strictly_decreasing(
        mu in 0.02f64..0.98,
        rho in 0.001f64..0.99,
        upstream in 1u64..20,
        c in 0.001f64..0.3,
    ) {
        let p = BetaParams::new(mu, rho).unwrap();
        let mu_up = mean_of(p, upstream as f64);
        let corr: Vec<f64> = (0..15)
            .map(|s| marginal_profit_correlated(s, upstream, mu_up, &p, 1.0, c))
            .collect();
        let unc: Vec<f64> = (0..15)
            .map(|s| marginal_profit_uncorrelated(s as f64, mu, 1.0, c))
            .collect();
        for v in [&corr, &unc] {
            prop_assert!(v.windows(2).all(|w| w[1] < w[0]));
            let changes = v.windows(2).filter(|w| (w[0] > 0.0) != (w[1] > 0.0)).count();
            prop_assert!(changes <= 1);
        }
    }

    #[test]
    fn correlated_limit_matches_uncorrelated(mu in 0.02f64..0.98, c in 0.002f64..0.3) {
        let p = BetaParams::new(mu, 1e-9).unwrap();
        let a = optimal_sourcing_correlated(1, mu, &p, 1.0, c);
        let b = optimal_sourcing_uncorrelated(mu, 1.0, c);
        // Decisions may only part ways when the desired root sits on an integer.
        if a.optimal != b.optimal {
            prop_assert!((b.desired - b.desired.round()).abs() < 1e-5, "{:?} {:?}", a, b);
        }
        prop_assert!((a.desired - b.desired).abs() < 1e-5);
    }

    #[test]
    fn single_sourcing_steady_state_bound(mu0 in 0.02f64..0.98, rc in 0.001f64..0.08) {
        let econ = EconomyParams::new(1, 1.0, 2.0 * rc, BetaParams::new(mu0, 1e-9).unwrap()).unwrap();
        let traj = propagate_chain(&econ, 64).unwrap();
        if traj.last().s == 1 {
            prop_assert!(traj.mu_bar * (1.0 - traj.mu_bar) <= 3.0 * rc + 1e-7);
        }
    }
}
