//! Independent numerical oracles for the closed-form kernels.

use statrs::function::gamma::ln_gamma;
use supplyfrag_core::dist_core::{betapower_mean, BetaParams, BetaPowerParams};
use supplyfrag_core::firm_policy::{
    optimal_sourcing_correlated, optimal_sourcing_uncorrelated, shutdown_threshold,
};
use supplyfrag_core::quadrature::beta_kernel_integral;

fn quadrature_moment(p: &BetaParams, n: f64) -> f64 {
    let (a, b) = (p.alpha(), p.beta_shape());
    let (num, s_num) = beta_kernel_integral(a + n, b, 0.0, 1.0, 1e-14);
    let (den, s_den) = beta_kernel_integral(a, b, 0.0, 1.0, 1e-14);
    (num.ln() + s_num - den.ln() - s_den).exp()
}

#[test]
fn moments_match_quadrature() {
    let mus = [0.1, 0.3, 0.5, 0.7, 0.9];
    let rhos = [0.01, 0.1, 0.3, 0.6, 0.9];
    let powers = [1.0, 2.5, 8.0, 40.0];
    for &mu in &mus {
        for &rho in &rhos {
            let p = BetaParams::new(mu, rho).unwrap();
            for &n in &powers {
                let closed = betapower_mean(&BetaPowerParams::new(p, n).unwrap());
                let quad = quadrature_moment(&p, n);
                assert!(
                    (closed - quad).abs() < 1e-9,
                    "mu={mu} rho={rho} n={n}: {closed} vs {quad}"
                );
            }
        }
    }
}

/// `E[X^n]` through log-Gamma differences.
fn gamma_moment(p: &BetaParams, n: f64) -> f64 {
    let (a, r0) = (p.alpha(), p.concentration());
    (ln_gamma(a + n) - ln_gamma(a) - ln_gamma(r0 + n) + ln_gamma(r0)).exp()
}

/// Profit of contracting `s` suppliers, each with diversification `upstream`.
fn profit(s: u64, upstream: u64, disruption: impl Fn(f64) -> f64, pi: f64, c: f64) -> f64 {
    let fail = if s == 0 { 1.0 } else { disruption((upstream * s) as f64) };
    (1.0 - fail) * pi - 0.5 * c * (s * s) as f64
}

/// Argmax over `0..=50`, preferring the smaller `s` among exact ties.
fn brute_force(f: impl Fn(u64) -> f64) -> (u64, f64) {
    (0..=50u64).fold((0, f(0)), |best, s| {
        let v = f(s);
        if v > best.1 {
            (s, v)
        } else {
            best
        }
    })
}

fn assert_argmax(got: u64, want: (u64, f64), f: impl Fn(u64) -> f64, label: &str) {
    if got != want.0 {
        // Only an exact tie up to rounding may separate the two.
        assert!(
            (f(got) - want.1).abs() < 1e-12,
            "{label}: got {got}, brute force {} ({} vs {})",
            want.0,
            f(got),
            want.1
        );
    }
}

#[test]
fn uncorrelated_ceiling_is_profit_argmax() {
    for i in 1..100 {
        let mu = i as f64 / 100.0;
        for &c in &[0.001, 0.01, 0.04, 0.16, 0.5] {
            let got = optimal_sourcing_uncorrelated(mu, 1.0, c).optimal;
            let f = |s| profit(s, 1, |n| mu.powf(n), 1.0, c);
            assert_argmax(got, brute_force(f), f, &format!("mu={mu} c={c}"));
        }
    }
}

#[test]
fn correlated_ceiling_is_profit_argmax() {
    let mus = [0.05, 0.2, 0.4, 0.6, 0.8, 0.95];
    let rhos = [0.001, 0.02, 0.1, 0.3, 0.6, 0.9];
    for &mu in &mus {
        for &rho in &rhos {
            let p = BetaParams::new(mu, rho).unwrap();
            for &upstream in &[1u64, 2, 6] {
                for &c in &[0.002, 0.02, 0.08] {
                    let mu_up = gamma_moment(&p, upstream as f64);
                    let got = optimal_sourcing_correlated(upstream, mu_up, &p, 1.0, c).optimal;
                    let f = |s| profit(s, upstream, |n| gamma_moment(&p, n), 1.0, c);
                    let label = format!("mu={mu} rho={rho} S={upstream} c={c}");
                    assert_argmax(got, brute_force(f), f, &label);
                }
            }
        }
    }
}

#[test]
fn shutdown_threshold_separates_zero_sourcing() {
    for &rc in &[0.005, 0.02, 0.08, 0.3] {
        let t = shutdown_threshold(rc).unwrap();
        for i in 1..1000 {
            let mu = i as f64 / 1000.0;
            if (mu - t).abs() < 1e-9 {
                continue;
            }
            let zero = optimal_sourcing_uncorrelated(mu, 1.0, 2.0 * rc).optimal == 0;
            assert_eq!(zero, mu >= t, "rc={rc} mu={mu}");
        }
    }
}
