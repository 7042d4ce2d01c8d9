//! The representative firm's sourcing problem.
//!
//! A firm earns `pi` when it can produce and pays `(c / 2) s^2` for `s`
//! suppliers. Its marginal profit `ΔΠ(s) = Π(s + 1) - Π(s)` is strictly
//! decreasing in `s`; the *desired* strategy is the real root of `ΔΠ` and the
//! *optimal* integer strategy is its ceiling when positive and zero otherwise.
//!
//! Exact ties `ΔΠ(s) = 0` resolve to the smaller number of suppliers, so the
//! optimal strategy is always the smallest `s >= 0` with `ΔΠ(s) <= 0`.

use crate::dist_core::{eta, eta_real, BetaParams};
use crate::error::{Error, Result};
use crate::roots::bisect_decreasing;

/// Absolute tolerance, in suppliers, of every desired-sourcing root.
pub const ROOT_TOL: f64 = 1e-10;

const BRACKET_START: f64 = 8.0;
const BRACKET_MAX: f64 = (1u64 << 20) as f64;

/// Model constants shared by every layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EconomyParams {
    k: usize,
    pi: f64,
    c: f64,
    base: BetaParams,
}

impl EconomyParams {
    /// `k` downstream goods, per-period profit `pi`, quadratic cost
    /// coefficient `c` and basal law `base`.
    pub fn new(k: usize, pi: f64, c: f64, base: BetaParams) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("K must be at least 1".into()));
        }
        if !(pi > 0.0 && pi.is_finite()) {
            return Err(Error::domain("pi", pi, "pi > 0"));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::domain("c", c, "c > 0"));
        }
        Ok(EconomyParams { k, pi, c, base })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn pi(&self) -> f64 {
        self.pi
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn base(&self) -> BetaParams {
        self.base
    }

    /// Real marginal cost `rc = (c / 2) / pi`.
    pub fn rc(&self) -> f64 {
        0.5 * self.c / self.pi
    }

    pub fn with_base(&self, base: BetaParams) -> Self {
        EconomyParams { base, ..*self }
    }
}

/// A sourcing choice: the real root of the marginal profit and the integer
/// number of suppliers actually contracted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourcingDecision {
    pub desired: f64,
    pub optimal: u64,
}

/// Resolve the integer decision from a desired root, then nudge it so that it
/// is exactly the smallest `s` with `ΔΠ(s) <= 0` under the integer marginal
/// profit. The nudge only matters within `ROOT_TOL` of an integer.
fn integer_decision<F: Fn(u64) -> f64>(desired: f64, marginal: F) -> SourcingDecision {
    let mut n = if desired > 0.0 { desired.ceil() as u64 } else { 0 };
    while n > 0 && marginal(n - 1) <= 0.0 {
        n -= 1;
    }
    while marginal(n) > 0.0 {
        n += 1;
    }
    SourcingDecision {
        desired,
        optimal: n,
    }
}

/// Real root of a strictly decreasing marginal profit.
///
/// `lowest` is the infimum of the domain of `f` (may be above `-1/2`). When
/// `f(0) < 0` the root on `(max(lowest, -1/2), 0)` is returned if it exists,
/// and `-1/2` otherwise.
fn desired_root<F: Fn(f64) -> f64>(f: F, lowest: f64) -> f64 {
    let f0 = f(0.0);
    if f0 == 0.0 {
        return 0.0;
    }
    if f0 > 0.0 {
        let mut lo = 0.0;
        let mut hi = BRACKET_START;
        while f(hi) > 0.0 {
            if hi >= BRACKET_MAX {
                return hi;
            }
            lo = hi;
            hi *= 2.0;
        }
        return bisect_decreasing(f, lo, hi, ROOT_TOL);
    }
    if lowest < -0.5 {
        if f(-0.5) <= 0.0 {
            return -0.5;
        }
        return bisect_decreasing(f, -0.5, 0.0, ROOT_TOL);
    }
    // The domain ends inside (-1/2, 0); the marginal profit blows up there.
    let mut lo = None;
    for j in 1..=60 {
        let t = lowest * (1.0 - 0.5f64.powi(j));
        if f(t) > 0.0 {
            lo = Some(t);
            break;
        }
    }
    match lo {
        Some(lo) => bisect_decreasing(f, lo, 0.0, ROOT_TOL),
        None => -0.5,
    }
}

/// `ΔΠ(s) = mu^s (1 - mu) pi - c (s + 1/2)` when suppliers fail independently.
pub fn marginal_profit_uncorrelated(s: f64, mu: f64, pi: f64, c: f64) -> f64 {
    mu.powf(s) * (1.0 - mu) * pi - c * (s + 0.5)
}

/// Real root of [`marginal_profit_uncorrelated`]; may be `<= 0`.
pub fn desired_sourcing_uncorrelated(mu: f64, pi: f64, c: f64) -> f64 {
    desired_root(|s| marginal_profit_uncorrelated(s, mu, pi, c), f64::NEG_INFINITY)
}

pub fn optimal_sourcing_uncorrelated(mu: f64, pi: f64, c: f64) -> SourcingDecision {
    let desired = desired_sourcing_uncorrelated(mu, pi, c);
    integer_decision(desired, |s| marginal_profit_uncorrelated(s as f64, mu, pi, c))
}

/// Shutdown threshold `1 - rc`: above it a firm contracts no supplier.
pub fn shutdown_threshold(rc: f64) -> Result<f64> {
    if !(rc > 0.0 && rc < 1.0) {
        return Err(Error::domain("rc", rc, "0 < rc < 1"));
    }
    Ok(1.0 - rc)
}

/// `1/2 + sqrt(1/4 - 3 rc)`, the uncorrelated fragility threshold. Above it
/// the chain single-sources from layer one on. `None` when `rc > 1/12`.
pub fn critical_threshold_closed_form(rc: f64) -> Option<f64> {
    if !(rc > 0.0) {
        return None;
    }
    let disc = 0.25 - 3.0 * rc;
    // 3 * (1/12) rounds a hair above 1/4.
    if disc < -4.0 * f64::EPSILON {
        return None;
    }
    Some(0.5 + disc.max(0.0).sqrt())
}

/// Expected disruption with `s` suppliers, each of which has diversification
/// `upstream` and mean disruption `mu_up`: `η(s, S) mu_up`, and 1 when `s = 0`.
fn expected_disruption(s: f64, upstream: u64, mu_up: f64, base: &BetaParams) -> f64 {
    if s == 0.0 {
        1.0
    } else {
        eta_real(s, upstream as f64, base) * mu_up
    }
}

/// `ΔΠ(s) = (η(s, S) - η(s + 1, S)) mu_up pi - c (s + 1/2)` at integer `s`.
///
/// `s = 0` compares no sourcing (disruption 1) with one supplier.
pub fn marginal_profit_correlated(
    s: u64,
    upstream: u64,
    mu_up: f64,
    base: &BetaParams,
    pi: f64,
    c: f64,
) -> f64 {
    let here = if s == 0 {
        1.0
    } else {
        eta(s, upstream, base).expect("s, S >= 1") * mu_up
    };
    let next = eta(s + 1, upstream, base).expect("s + 1, S >= 1") * mu_up;
    (here - next) * pi - c * (s as f64 + 0.5)
}

/// Real-`s` extension of [`marginal_profit_correlated`] through the Gamma
/// function. Defined for `S s > -alpha`.
pub fn marginal_profit_correlated_real(
    s: f64,
    upstream: u64,
    mu_up: f64,
    base: &BetaParams,
    pi: f64,
    c: f64,
) -> f64 {
    let here = expected_disruption(s, upstream, mu_up, base);
    let next = expected_disruption(s + 1.0, upstream, mu_up, base);
    (here - next) * pi - c * (s + 0.5)
}

pub fn desired_sourcing_correlated(
    upstream: u64,
    mu_up: f64,
    base: &BetaParams,
    pi: f64,
    c: f64,
) -> f64 {
    let lowest = -base.alpha() / upstream as f64;
    desired_root(
        |s| marginal_profit_correlated_real(s, upstream, mu_up, base, pi, c),
        lowest,
    )
}

/// Optimal number of suppliers for a firm whose suppliers have upstream
/// diversification `upstream` and mean disruption `mu_up`.
pub fn optimal_sourcing_correlated(
    upstream: u64,
    mu_up: f64,
    base: &BetaParams,
    pi: f64,
    c: f64,
) -> SourcingDecision {
    let desired = desired_sourcing_correlated(upstream, mu_up, base, pi, c);
    integer_decision(desired, |s| {
        marginal_profit_correlated(s, upstream, mu_up, base, pi, c)
    })
}

/// One-layer problem with suppliers whose disruption probability is
/// `Beta(supplier)` distributed.
pub fn single_layer_sourcing(supplier: &BetaParams, pi: f64, c: f64) -> SourcingDecision {
    optimal_sourcing_correlated(1, supplier.mu(), supplier, pi, c)
}

const PEAK_EDGE: f64 = 1e-4;
const PEAK_GRID: usize = 65;

/// Supplier correlation that maximises desired sourcing in the one-layer
/// problem with supplier mean `mu`.
pub fn peak_correlation(mu: f64, pi: f64, c: f64) -> Result<f64> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::domain("mu", mu, "0 < mu < 1"));
    }
    let desired = |rho: f64| {
        let p = BetaParams::new(mu, rho).expect("rho strictly inside (0, 1)");
        desired_sourcing_correlated(1, mu, &p, pi, c)
    };
    let step = (1.0 - 2.0 * PEAK_EDGE) / (PEAK_GRID - 1) as f64;
    let grid: Vec<f64> = (0..PEAK_GRID).map(|i| PEAK_EDGE + step * i as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&r| desired(r)).collect();
    let (best, best_value) = values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    if best == 0 || best + 1 == PEAK_GRID || best_value <= 0.0 {
        return Err(Error::NoInteriorPeak);
    }
    Ok(golden_section_max(desired, grid[best - 1], grid[best + 1], 1e-9))
}

fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bp(mu: f64, rho: f64) -> BetaParams {
        BetaParams::new(mu, rho).unwrap()
    }

    #[test]
    fn economy_rc_and_validation() {
        let e = EconomyParams::new(3, 2.0, 0.4, bp(0.5, 0.1)).unwrap();
        assert!((e.rc() - 0.1).abs() < 1e-15);
        assert!(EconomyParams::new(0, 1.0, 0.1, bp(0.5, 0.1)).is_err());
        assert!(EconomyParams::new(1, 0.0, 0.1, bp(0.5, 0.1)).is_err());
        assert!(EconomyParams::new(1, 1.0, -0.1, bp(0.5, 0.1)).is_err());
    }

    #[test]
    fn marginal_profit_uncorrelated_examples() {
        assert!((marginal_profit_uncorrelated(0.0, 0.5, 1.0, 0.5) - 0.25).abs() < 1e-15);
        assert!(marginal_profit_uncorrelated(100.0, 0.5, 1.0, 0.5) < 0.0);
        let near_one = marginal_profit_uncorrelated(2.0, 1.0 - 1e-12, 1.0, 0.5);
        assert!((near_one + 0.5 * 2.5).abs() < 1e-9);
    }

    #[test]
    fn desired_uncorrelated_example() {
        // Independent bisection on 0.5^(s+1) - 0.5 s - 0.25.
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..80 {
            let m = 0.5 * (lo + hi);
            if 0.5f64.powf(m + 1.0) - 0.5 * m - 0.25 > 0.0 {
                lo = m
            } else {
                hi = m
            }
        }
        let d = desired_sourcing_uncorrelated(0.5, 1.0, 0.5);
        assert!((d - lo).abs() < 1e-9);
        assert!((d - 0.308).abs() < 1e-3);
        assert_eq!(optimal_sourcing_uncorrelated(0.5, 1.0, 0.5).optimal, 1);
    }

    #[test]
    fn desired_at_shutdown_threshold_is_zero() {
        // pi = 1, c = 0.5 -> rc = 0.25, threshold 0.75 (exactly representable).
        let d = desired_sourcing_uncorrelated(0.75, 1.0, 0.5);
        assert_eq!(d, 0.0);
        assert_eq!(optimal_sourcing_uncorrelated(0.75, 1.0, 0.5).optimal, 0);
        assert!(desired_sourcing_uncorrelated(0.8, 1.0, 0.5) <= 0.0);
    }

    #[test]
    fn no_sourcing_above_shutdown() {
        let dec = optimal_sourcing_uncorrelated(0.9, 1.0, 1.9);
        assert_eq!(dec.optimal, 0);
        assert!(dec.desired <= 0.0 && dec.desired >= -0.5);
    }

    #[test]
    fn shutdown_threshold_examples() {
        assert!((shutdown_threshold(0.25).unwrap() - 0.75).abs() < 1e-15);
        assert!((shutdown_threshold(1e-12).unwrap() - 1.0).abs() < 1e-11);
        assert!(shutdown_threshold(0.0).is_err());
        assert!(shutdown_threshold(1.0).is_err());
        let rc = 0.2;
        let t = shutdown_threshold(rc).unwrap();
        let c = 2.0 * rc;
        assert_eq!(optimal_sourcing_uncorrelated(t + 1e-6, 1.0, c).optimal, 0);
        assert!(optimal_sourcing_uncorrelated(t - 1e-6, 1.0, c).optimal >= 1);
    }

    #[test]
    fn critical_closed_form_examples() {
        assert!((critical_threshold_closed_form(1.0 / 12.0).unwrap() - 0.5).abs() < 1e-7);
        assert!((critical_threshold_closed_form(1e-12).unwrap() - 1.0).abs() < 1e-10);
        let v = critical_threshold_closed_form(0.05).unwrap();
        assert!((v - (0.5 + 0.1f64.sqrt())).abs() < 1e-15);
        assert!((v - 0.81623).abs() < 1e-5);
        assert!(critical_threshold_closed_form(0.09).is_none());
        assert!(critical_threshold_closed_form(0.0).is_none());
    }

    #[test]
    fn marginal_profit_correlated_example() {
        let p = bp(0.5, 0.5);
        let v = marginal_profit_correlated(1, 1, 0.5, &p, 1.0, 0.1);
        assert!((v + 0.025).abs() < 1e-15, "{v}");
        let r = marginal_profit_correlated_real(1.0, 1, 0.5, &p, 1.0, 0.1);
        assert!((r - v).abs() < 1e-14);
    }

    #[test]
    fn correlated_reduces_to_uncorrelated() {
        let p = bp(0.6, 1e-9);
        for up in [1u64, 2, 4] {
            let mu_up = 0.6f64.powi(up as i32);
            for s in 0..6u64 {
                let a = marginal_profit_correlated(s, up, mu_up, &p, 1.0, 0.05);
                let b = marginal_profit_uncorrelated(s as f64, mu_up, 1.0, 0.05);
                assert!((a - b).abs() < 1e-5, "S={up} s={s}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn correlated_strictly_decreasing() {
        for &(mu, rho) in &[(0.2, 0.05), (0.5, 0.3), (0.8, 0.7), (0.5, 0.99)] {
            let p = bp(mu, rho);
            for up in [1u64, 3] {
                let mu_up = p.moment(up as f64);
                let vals: Vec<f64> = (0..=10)
                    .map(|s| marginal_profit_correlated(s, up, mu_up, &p, 1.0, 0.02))
                    .collect();
                assert!(vals.windows(2).all(|w| w[1] < w[0]), "{mu} {rho}: {vals:?}");
            }
        }
    }

    #[test]
    fn zero_branch_when_first_supplier_unprofitable() {
        let p = bp(0.97, 0.2);
        let dec = optimal_sourcing_correlated(1, 0.97, &p, 1.0, 0.1);
        assert!(marginal_profit_correlated(0, 1, 0.97, &p, 1.0, 0.1) < 0.0);
        assert_eq!(dec.optimal, 0);
        assert!(dec.desired <= 0.0);
    }

    #[test]
    fn perfect_correlation_single_sources() {
        let p = bp(0.5, 0.999);
        assert_eq!(single_layer_sourcing(&p, 1.0, 0.01).optimal, 1);
        // Same mean, weak correlation: diversification pays.
        assert!(single_layer_sourcing(&bp(0.5, 0.05), 1.0, 0.01).optimal >= 3);
    }

    #[test]
    fn single_layer_limits() {
        for &mu in &[0.1, 0.4, 0.7] {
            let a = single_layer_sourcing(&bp(mu, 1e-9), 1.0, 0.04);
            let b = optimal_sourcing_uncorrelated(mu, 1.0, 0.04);
            assert_eq!(a.optimal, b.optimal);
            assert!((a.desired - b.desired).abs() < 1e-5);
        }
        assert_eq!(single_layer_sourcing(&bp(0.99, 1e-9), 1.0, 0.04).optimal, 0);
    }

    #[test]
    fn peak_correlation_is_interior_maximum() {
        let (mu, pi, c) = (0.5, 1.0, 0.01);
        let rho_c = peak_correlation(mu, pi, c).unwrap();
        assert!(rho_c > 0.02 && rho_c < 0.98);
        let d = |r: f64| single_layer_sourcing(&bp(mu, r), pi, c).desired;
        let (l, m, r) = (d(rho_c - 0.02), d(rho_c), d(rho_c + 0.02));
        assert!(m > l && m > r, "{l} {m} {r}");
    }

    #[test]
    fn peak_correlation_reports_monotone_case() {
        // For mu = 0.5, c = 0.04 desired sourcing only falls with correlation.
        assert_eq!(peak_correlation(0.5, 1.0, 0.04), Err(Error::NoInteriorPeak));
    }
}
