//! Layer-by-layer propagation of sourcing decisions down the chain.
//!
//! The state after layer `k` is the cumulative diversification
//! `S_k = s_1 ... s_k` and the mean disruption probability `mu_k` of a
//! layer-`k` firm. A firm in layer `k + 1` faces suppliers of that kind and
//! picks `s_{k+1}`; the chain settles as soon as some layer picks 0 or 1.

use rayon::prelude::*;

use crate::dist_core::{eta, BetaParams};
use crate::error::{Error, Result};
use crate::firm_policy::{optimal_sourcing_correlated, EconomyParams, SourcingDecision};

pub const DEFAULT_MAX_LAYERS: usize = 64;

const SCAN_STEP: f64 = 0.01;
const SCAN_POINTS: usize = 99;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerState {
    /// Layer index, starting at 1 for the first sourcing layer.
    pub k: usize,
    pub s: u64,
    /// Cumulative diversification `S_k`.
    pub diversification: u64,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainTrajectory {
    pub mu0: f64,
    pub layers: Vec<LayerState>,
    pub mu_bar: f64,
    /// `mu_bar >= mu0`.
    pub fragile: bool,
    /// False when `max_layers` ran out while firms were still diversifying.
    pub converged: bool,
}

impl ChainTrajectory {
    pub fn last(&self) -> &LayerState {
        self.layers.last().expect("a trajectory has at least one layer")
    }
}

/// One step of the law of motion from state `(upstream, mu)`.
///
/// Returns the decision and the next `(S, mu)`.
pub fn step(
    upstream: u64,
    mu: f64,
    econ: &EconomyParams,
) -> Result<(SourcingDecision, u64, f64)> {
    let base = econ.base();
    let dec = optimal_sourcing_correlated(upstream, mu, &base, econ.pi(), econ.c());
    match dec.optimal {
        0 => Ok((dec, upstream, 1.0)),
        1 => Ok((dec, upstream, mu)),
        s => {
            let next = upstream
                .checked_mul(s)
                .ok_or(Error::DiversificationOverflow)?;
            Ok((dec, next, eta(s, upstream, &base)? * mu))
        }
    }
}

/// Iterates the representative-firm decision until a fixed point or
/// `max_layers` layers.
pub fn propagate_chain(econ: &EconomyParams, max_layers: usize) -> Result<ChainTrajectory> {
    if max_layers == 0 {
        return Err(Error::InvalidArgument("max_layers must be positive".into()));
    }
    let mu0 = econ.base().mu();
    let mut upstream = 1u64;
    let mut mu = mu0;
    let mut layers = Vec::new();
    let mut converged = false;
    for k in 1..=max_layers {
        let (dec, next_s, next_mu) = step(upstream, mu, econ)?;
        upstream = next_s;
        mu = next_mu;
        layers.push(LayerState {
            k,
            s: dec.optimal,
            diversification: upstream,
            mu,
        });
        if dec.optimal <= 1 {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!(
            "chain still diversifying after {max_layers} layers (mu0 = {mu0}, rho0 = {})",
            econ.base().rho()
        );
    }
    Ok(ChainTrajectory {
        mu0,
        layers,
        mu_bar: mu,
        fragile: mu >= mu0,
        converged,
    })
}

fn chain_at(mu0: f64, rho0: f64, pi: f64, c: f64) -> Result<ChainTrajectory> {
    let econ = EconomyParams::new(1, pi, c, BetaParams::new(mu0, rho0)?)?;
    propagate_chain(&econ, DEFAULT_MAX_LAYERS)
}

/// `(mu0, mu_bar)` for each point of a strictly increasing grid in `(0, 1)`.
pub fn limit_map(mu0_grid: &[f64], rho0: f64, pi: f64, c: f64) -> Result<Vec<(f64, f64)>> {
    if mu0_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument(
            "mu0 grid must be strictly increasing".into(),
        ));
    }
    mu0_grid
        .par_iter()
        .map(|&mu0| chain_at(mu0, rho0, pi, c).map(|t| (mu0, t.mu_bar)))
        .collect()
}

/// Critical basal mean: the point where the chain turns from resilient to
/// fragile, scanning `mu0` upward on a grid of step 0.01 and bisecting the
/// bracketing cell to `tol`. Returns the fragile end of the final bracket.
///
/// Very small `mu0` can also be fragile (the first layer single-sources and
/// `mu_bar = mu0`); only resilient-to-fragile changes count as transitions.
pub fn critical_mu(rho0: f64, pi: f64, c: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::domain("tol", tol, "tol > 0"));
    }
    let grid: Vec<f64> = (1..=SCAN_POINTS).map(|i| SCAN_STEP * i as f64).collect();
    let fragile: Vec<bool> = grid
        .par_iter()
        .map(|&mu0| chain_at(mu0, rho0, pi, c).map(|t| t.fragile))
        .collect::<Result<_>>()?;
    let brackets: Vec<(f64, f64)> = (0..grid.len() - 1)
        .filter(|&i| !fragile[i] && fragile[i + 1])
        .map(|i| (grid[i], grid[i + 1]))
        .collect();
    let (mut lo, mut hi) = match brackets.as_slice() {
        [] if fragile.iter().all(|&f| f) => return Err(Error::NoTransition("entire range fragile")),
        [] => return Err(Error::NoTransition("entire range resilient")),
        [one] => *one,
        _ => return Err(Error::MultipleTransitions(brackets)),
    };
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if chain_at(mid, rho0, pi, c)?.fragile {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist_core::betapower_mean;
    use crate::dist_core::BetaPowerParams;
    use crate::firm_policy::{optimal_sourcing_uncorrelated, shutdown_threshold};

    fn econ(mu0: f64, rho0: f64, pi: f64, c: f64) -> EconomyParams {
        EconomyParams::new(1, pi, c, BetaParams::new(mu0, rho0).unwrap()).unwrap()
    }

    #[test]
    fn shutdown_branch() {
        let t = propagate_chain(&econ(0.99, 0.3, 1.0, 0.04), 64).unwrap();
        assert_eq!(t.layers.len(), 1);
        assert_eq!(t.layers[0].s, 0);
        assert_eq!(t.mu_bar, 1.0);
        assert!(t.fragile && t.converged);
    }

    #[test]
    fn resilient_uncorrelated_satisfies_steady_state_bound() {
        let rc = 0.01;
        let t = propagate_chain(&econ(0.3, 1e-9, 1.0, 2.0 * rc), 64).unwrap();
        assert!(t.converged);
        assert!(t.mu_bar < 0.3);
        assert!(!t.fragile);
        assert!(t.mu_bar * (1.0 - t.mu_bar) <= 3.0 * rc);
    }

    #[test]
    fn matches_uncorrelated_iteration() {
        for &mu0 in &[0.2, 0.4, 0.6, 0.8, 0.95] {
            let (pi, c) = (1.0, 0.04);
            let t = propagate_chain(&econ(mu0, 1e-9, pi, c), 64).unwrap();
            let mut mu = mu0;
            let mut ss = Vec::new();
            loop {
                let s = optimal_sourcing_uncorrelated(mu, pi, c).optimal;
                ss.push(s);
                mu = if s == 0 { 1.0 } else { mu.powi(s as i32) };
                if s <= 1 {
                    break;
                }
            }
            let got: Vec<u64> = t.layers.iter().map(|l| l.s).collect();
            assert_eq!(got, ss, "mu0 = {mu0}");
            assert!((t.mu_bar - mu).abs() <= 1e-6 * mu.max(1e-300), "{} vs {mu}", t.mu_bar);
        }
    }

    #[test]
    fn conserves_betapower_family() {
        for &(mu0, rho0) in &[(0.3, 0.05), (0.5, 0.02), (0.6, 0.2), (0.2, 0.01)] {
            let e = econ(mu0, rho0, 1.0, 0.01);
            let t = propagate_chain(&e, 64).unwrap();
            for l in t.layers.iter().filter(|l| l.s >= 1) {
                let bp = BetaPowerParams::new(e.base(), l.diversification as f64).unwrap();
                let want = betapower_mean(&bp);
                assert!(((l.mu - want) / want).abs() < 1e-10, "{l:?} vs {want}");
            }
        }
    }

    #[test]
    fn fixed_point_idempotent() {
        let e = econ(0.4, 0.1, 1.0, 0.02);
        let t = propagate_chain(&e, 64).unwrap();
        let last = t.last();
        assert!(last.s <= 1);
        let (dec, s, mu) = step(last.diversification, last.mu, &e).unwrap();
        assert_eq!(dec.optimal, last.s);
        assert_eq!(s, last.diversification);
        assert_eq!(mu, last.mu);
    }

    #[test]
    fn max_layers_truncation_is_reported() {
        let t = propagate_chain(&econ(0.5, 0.01, 1.0, 0.001), 1).unwrap();
        assert!(t.layers[0].s >= 2);
        assert!(!t.converged);
        assert!(propagate_chain(&econ(0.5, 0.01, 1.0, 0.001), 0).is_err());
    }

    #[test]
    fn limit_map_shape() {
        let (pi, c) = (1.0, 0.04);
        let grid: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
        let map = limit_map(&grid, 0.1, pi, c).unwrap();
        let shut = shutdown_threshold(0.02).unwrap();
        for &(mu0, mu_bar) in &map {
            assert!((0.0..=1.0).contains(&mu_bar));
            if mu0 > shut {
                assert_eq!(mu_bar, 1.0);
            }
            if mu0 <= 0.1 {
                assert!(mu_bar <= mu0);
            }
        }
        assert!(limit_map(&[0.2, 0.2], 0.1, pi, c).is_err());
    }

    #[test]
    fn limit_map_jumps_in_fragile_regime() {
        let grid: Vec<f64> = (1..1000).map(|i| i as f64 / 1000.0).collect();
        let map = limit_map(&grid, 0.05, 1.0, 0.04).unwrap();
        let jump = map
            .windows(2)
            .map(|w| w[1].1 - w[0].1)
            .fold(0.0f64, f64::max);
        assert!(jump > 0.2, "{jump}");
    }

    #[test]
    fn critical_mu_uncorrelated_closed_form() {
        let rc = 0.05;
        let got = critical_mu(1e-9, 1.0, 2.0 * rc, 1e-7).unwrap();
        assert!((got - (0.5 + (0.25 - 3.0 * rc).sqrt())).abs() < 1e-4, "{got}");
    }

    #[test]
    fn critical_mu_below_shutdown() {
        for &rho0 in &[0.05, 0.2] {
            let got = critical_mu(rho0, 1.0, 0.04, 1e-6).unwrap();
            assert!(got <= 1.0 - 0.02 + 1e-6);
        }
    }

    #[test]
    fn critical_mu_without_transition() {
        // rc = 0.08 with strong correlation: everything single-sources or shuts down.
        assert!(matches!(
            critical_mu(0.5, 1.0, 0.16, 1e-6),
            Err(Error::NoTransition(_))
        ));
        assert!(critical_mu(0.1, 1.0, 0.04, 0.0).is_err());
    }
}
