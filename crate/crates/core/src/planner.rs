//! Social planner benchmark and welfare comparisons.
//!
//! The planner picks `s_1, ..., s_K` to maximise average payoff across the K
//! downstream layers. Because the disruption law of layer `k` only depends on
//! the cumulative diversification `S_k`, the dynamic program runs over the
//! reachable set of products of choices, memoised per `(k, S)`.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::chain_dynamics::{propagate_chain, ChainTrajectory, DEFAULT_MAX_LAYERS};
use crate::dist_core::BetaParams;
use crate::error::{Error, Result};
use crate::firm_policy::EconomyParams;

/// `(1 - E[X^(S s)]) pi - (c / 2) s^2`, and 0 for `s = 0`.
pub fn stage_payoff(s: u64, upstream: u64, base: &BetaParams, pi: f64, c: f64) -> f64 {
    if s == 0 {
        return 0.0;
    }
    let power = upstream as f64 * s as f64;
    let sf = s as f64;
    (1.0 - base.moment(power)) * pi - 0.5 * c * sf * sf
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerOptions {
    pub s_max: u64,
    pub state_cap: usize,
    /// Below this mean disruption a state only chooses between 0 and 1.
    pub saturation: f64,
}

impl Default for PlannerOptions {
    fn default() -> Self {
        PlannerOptions {
            s_max: 12,
            state_cap: 1_000_000,
            saturation: 1e-15,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerSolution {
    pub s_seq: Vec<u64>,
    /// `V_1 / K` from the backward pass.
    pub value: f64,
    /// Planner mean disruption per layer, 1 after a shutdown.
    pub mu_traj: Vec<f64>,
    /// Forward re-evaluation of the average payoff under `s_seq`.
    pub welfare: f64,
    pub hit_s_max: bool,
}

impl PlannerSolution {
    /// Disruption probability of the most downstream layer.
    pub fn mu_bar(&self) -> f64 {
        *self.mu_traj.last().expect("K >= 1")
    }
}

struct Dp<'a> {
    econ: &'a EconomyParams,
    opts: &'a PlannerOptions,
    memo: HashMap<(usize, u64), (f64, u64)>,
}

impl Dp<'_> {
    fn choices(&self, upstream: u64) -> u64 {
        if self.econ.base().moment(upstream as f64) < self.opts.saturation {
            1
        } else {
            self.opts.s_max
        }
    }

    /// `(V_k(S), argmax)`; `V_{K+1} = 0`.
    fn solve(&mut self, k: usize, upstream: u64) -> Result<(f64, u64)> {
        if k > self.econ.k() {
            return Ok((0.0, 0));
        }
        if let Some(&hit) = self.memo.get(&(k, upstream)) {
            return Ok(hit);
        }
        let (base, pi, c) = (self.econ.base(), self.econ.pi(), self.econ.c());
        let mut best = (0.0, 0u64);
        for s in 1..=self.choices(upstream) {
            let next = upstream
                .checked_mul(s)
                .ok_or(Error::DiversificationOverflow)?;
            let (cont, _) = self.solve(k + 1, next)?;
            let total = stage_payoff(s, upstream, &base, pi, c) + cont;
            if total > best.0 {
                best = (total, s);
            }
        }
        if self.memo.len() >= self.opts.state_cap {
            return Err(Error::StateCapExceeded {
                cap: self.opts.state_cap,
            });
        }
        self.memo.insert((k, upstream), best);
        Ok(best)
    }
}

/// Backward induction for the planner problem, then a forward pass from
/// `S = 1` to extract the optimal sequence. Ties choose the smaller `s`;
/// choosing `s = 0` is absorbing with zero continuation.
pub fn planner_solve(econ: &EconomyParams, opts: &PlannerOptions) -> Result<PlannerSolution> {
    if opts.s_max == 0 {
        return Err(Error::InvalidArgument("s_max must be at least 1".into()));
    }
    let k_layers = econ.k();
    let mut dp = Dp {
        econ,
        opts,
        memo: HashMap::new(),
    };
    let (v1, _) = dp.solve(1, 1)?;

    let base = econ.base();
    let mut s_seq = Vec::with_capacity(k_layers);
    let mut mu_traj = Vec::with_capacity(k_layers);
    let mut payoff_sum = 0.0;
    let mut upstream = 1u64;
    let mut alive = true;
    let mut hit_s_max = false;
    for k in 1..=k_layers {
        let s = if alive { dp.solve(k, upstream)?.1 } else { 0 };
        hit_s_max |= alive && s == opts.s_max;
        if s == 0 {
            alive = false;
        }
        if alive {
            payoff_sum += stage_payoff(s, upstream, &base, econ.pi(), econ.c());
            upstream *= s;
            mu_traj.push(base.moment(upstream as f64));
        } else {
            mu_traj.push(1.0);
        }
        s_seq.push(s);
    }
    if hit_s_max {
        log::warn!(
            "planner choice reached s_max = {} (mu0 = {}, rho0 = {})",
            opts.s_max,
            base.mu(),
            base.rho()
        );
    }
    Ok(PlannerSolution {
        s_seq,
        value: v1 / k_layers as f64,
        mu_traj,
        welfare: payoff_sum / k_layers as f64,
        hit_s_max,
    })
}

/// Average payoff of layers `1..=K` along a decentralized trajectory.
/// Layers past the fixed point repeat its payoff.
pub fn decentralized_welfare(traj: &ChainTrajectory, econ: &EconomyParams) -> f64 {
    let k_layers = econ.k();
    let total: f64 = (0..k_layers)
        .map(|i| {
            let layer = &traj.layers[i.min(traj.layers.len() - 1)];
            if layer.s == 0 {
                0.0
            } else {
                let s = layer.s as f64;
                (1.0 - layer.mu) * econ.pi() - 0.5 * econ.c() * s * s
            }
        })
        .sum();
    total / k_layers as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelfareCell {
    pub mu0: f64,
    pub rho0: f64,
    /// Decentralized fixed-point disruption probability.
    pub mu_bar: f64,
    /// Planner disruption probability at layer K.
    pub mu_bar_planner: f64,
    pub welfare: f64,
    pub welfare_planner: f64,
}

impl WelfareCell {
    pub fn risk_difference(&self) -> f64 {
        self.mu_bar - self.mu_bar_planner
    }

    pub fn welfare_loss(&self) -> f64 {
        self.welfare - self.welfare_planner
    }
}

/// Decentralized vs planner outcomes over a `(mu0, rho0)` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WelfareGrid {
    pub mu0: Vec<f64>,
    pub rho0: Vec<f64>,
    /// Row-major in `mu0`; failed cells keep their error.
    pub cells: Vec<Result<WelfareCell>>,
}

impl WelfareGrid {
    pub fn cell(&self, i_mu: usize, j_rho: usize) -> &Result<WelfareCell> {
        &self.cells[i_mu * self.rho0.len() + j_rho]
    }

    pub fn ok_cells(&self) -> impl Iterator<Item = &WelfareCell> {
        self.cells.iter().filter_map(|c| c.as_ref().ok())
    }
}

fn compare_cell(mu0: f64, rho0: f64, pi: f64, c: f64, k: usize, s_max: u64) -> Result<WelfareCell> {
    let econ = EconomyParams::new(k, pi, c, BetaParams::new(mu0, rho0)?)?;
    let traj = propagate_chain(&econ, DEFAULT_MAX_LAYERS.max(k))?;
    let opts = PlannerOptions {
        s_max,
        ..PlannerOptions::default()
    };
    let plan = planner_solve(&econ, &opts)?;
    Ok(WelfareCell {
        mu0,
        rho0,
        mu_bar: traj.mu_bar,
        mu_bar_planner: plan.mu_bar(),
        welfare: decentralized_welfare(&traj, &econ),
        welfare_planner: plan.welfare,
    })
}

pub fn comparison_grid(
    mu0_list: &[f64],
    rho0_list: &[f64],
    pi: f64,
    c: f64,
    k: usize,
    s_max: u64,
) -> WelfareGrid {
    let cells = mu0_list
        .par_iter()
        .flat_map_iter(|&mu0| {
            rho0_list
                .iter()
                .map(move |&rho0| compare_cell(mu0, rho0, pi, c, k, s_max))
        })
        .collect();
    WelfareGrid {
        mu0: mu0_list.to_vec(),
        rho0: rho0_list.to_vec(),
        cells,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist_core::{betapower_mean, BetaPowerParams};

    fn econ(k: usize, mu0: f64, rho0: f64, pi: f64, c: f64) -> EconomyParams {
        EconomyParams::new(k, pi, c, BetaParams::new(mu0, rho0).unwrap()).unwrap()
    }

    fn opts(s_max: u64) -> PlannerOptions {
        PlannerOptions {
            s_max,
            ..PlannerOptions::default()
        }
    }

    /// Exhaustive search over all sequences in `0..=s_max`, accumulating
    /// payoffs from the last layer back so the sums match the DP bit for bit.
    fn brute_force(e: &EconomyParams, s_max: u64) -> (f64, Vec<u64>) {
        let k = e.k();
        let mut best = (f64::NEG_INFINITY, Vec::new());
        let total_seqs = (s_max + 1).pow(k as u32);
        for code in 0..total_seqs {
            let mut seq = Vec::with_capacity(k);
            let mut rest = code;
            for _ in 0..k {
                seq.push(rest % (s_max + 1));
                rest /= s_max + 1;
            }
            seq.reverse();
            let mut payoffs = Vec::with_capacity(k);
            let mut upstream = 1u64;
            for &s in &seq {
                if upstream == 0 {
                    payoffs.push(0.0);
                    continue;
                }
                payoffs.push(stage_payoff(s, upstream, &e.base(), e.pi(), e.c()));
                upstream *= s;
            }
            let v = payoffs.iter().rev().fold(0.0, |acc, &p| p + acc);
            // Lexicographic order visits smaller choices first, so `>` keeps
            // the DP's tie rule.
            if v > best.0 {
                best = (v, seq);
            }
        }
        best
    }

    #[test]
    fn stage_payoff_examples() {
        let p = BetaParams::new(0.3, 0.2).unwrap();
        assert_eq!(stage_payoff(0, 5, &p, 1.0, 0.1), 0.0);
        assert!((stage_payoff(1, 1, &p, 2.0, 0.1) - (0.7 * 2.0 - 0.05)).abs() < 1e-15);
        for s in 1..6u64 {
            for up in [1u64, 2, 6] {
                let bp = BetaPowerParams::new(p, (up * s) as f64).unwrap();
                let want = (1.0 - betapower_mean(&bp)) * 1.5 - 0.05 * (s * s) as f64;
                assert!((stage_payoff(s, up, &p, 1.5, 0.1) - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn dp_matches_brute_force() {
        let mus = [0.1, 0.3, 0.5, 0.7, 0.9];
        let rhos = [0.01, 0.1, 0.3, 0.6, 0.9];
        for k in 1..=3 {
            for &mu in &mus {
                for &rho in &rhos {
                    let e = econ(k, mu, rho, 1.0, 0.03);
                    let sol = planner_solve(&e, &opts(4)).unwrap();
                    let (bv, bseq) = brute_force(&e, 4);
                    assert_eq!(sol.value, bv / k as f64, "K={k} mu={mu} rho={rho}");
                    let dp_seq: Vec<u64> = sol.s_seq.clone();
                    let trimmed: Vec<u64> = {
                        let mut out = bseq.clone();
                        if let Some(z) = out.iter().position(|&s| s == 0) {
                            out[z..].iter_mut().for_each(|s| *s = 0);
                        }
                        out
                    };
                    assert_eq!(dp_seq, trimmed, "K={k} mu={mu} rho={rho}");
                }
            }
        }
    }

    #[test]
    fn single_layer_rule() {
        let e = econ(1, 0.4, 1e-9, 1.0, 0.02);
        let sol = planner_solve(&e, &opts(12)).unwrap();
        let best = (0..=12u64)
            .max_by(|&a, &b| {
                let pa = stage_payoff(a, 1, &e.base(), 1.0, 0.02);
                let pb = stage_payoff(b, 1, &e.base(), 1.0, 0.02);
                pa.partial_cmp(&pb).unwrap().then(b.cmp(&a))
            })
            .unwrap();
        assert_eq!(sol.s_seq, vec![best]);
    }

    #[test]
    fn unprofitable_economy_shuts_down() {
        let e = econ(4, 0.5, 0.3, 1e-12, 0.1);
        let sol = planner_solve(&e, &opts(12)).unwrap();
        assert_eq!(sol.s_seq, vec![0; 4]);
        assert_eq!(sol.value, 0.0);
        assert_eq!(sol.welfare, 0.0);
        assert!(sol.mu_traj.iter().all(|&m| m == 1.0));
    }

    #[test]
    fn value_consistent_and_trajectory_in_family() {
        let e = econ(5, 0.45, 0.15, 1.0, 0.02);
        let sol = planner_solve(&e, &opts(12)).unwrap();
        assert!((sol.value - sol.welfare).abs() < 1e-12);
        let mut upstream = 1u64;
        for (s, mu) in sol.s_seq.iter().zip(&sol.mu_traj) {
            upstream *= s;
            let bp = BetaPowerParams::new(e.base(), upstream as f64).unwrap();
            assert!(((mu - betapower_mean(&bp)) / mu).abs() < 1e-12);
        }
    }

    #[test]
    fn bellman_consistency() {
        let e = econ(4, 0.5, 0.1, 1.0, 0.02);
        let o = opts(8);
        let mut dp = Dp {
            econ: &e,
            opts: &o,
            memo: HashMap::new(),
        };
        dp.solve(1, 1).unwrap();
        let entries: Vec<_> = dp.memo.iter().map(|(&k, &v)| (k, v)).collect();
        for ((k, up), (v, s)) in entries {
            let cont = if s == 0 {
                0.0
            } else {
                dp.solve(k + 1, up * s).unwrap().0
            };
            assert_eq!(v, stage_payoff(s, up, &e.base(), e.pi(), e.c()) + cont);
        }
    }

    #[test]
    fn state_cap_is_enforced() {
        let e = econ(4, 0.5, 0.1, 1.0, 0.001);
        let o = PlannerOptions {
            s_max: 12,
            state_cap: 10,
            saturation: 1e-15,
        };
        assert_eq!(
            planner_solve(&e, &o),
            Err(Error::StateCapExceeded { cap: 10 })
        );
    }

    #[test]
    fn decentralized_welfare_examples() {
        let e = econ(3, 0.99, 0.2, 1.0, 0.04);
        let traj = propagate_chain(&e, 64).unwrap();
        assert_eq!(decentralized_welfare(&traj, &e), 0.0);

        // Strong correlation at rc = 0.08: every layer single-sources.
        let e = econ(4, 0.5, 0.5, 1.0, 0.16);
        let traj = propagate_chain(&e, 64).unwrap();
        assert_eq!(traj.layers[0].s, 1);
        let w = decentralized_welfare(&traj, &e);
        assert!((w - (0.5 - 0.08)).abs() < 1e-15);
    }

    #[test]
    fn planner_dominates_on_grid() {
        let mus: Vec<f64> = (1..=10).map(|i| i as f64 / 11.0).collect();
        let rhos: Vec<f64> = (1..=10).map(|i| i as f64 / 11.0).collect();
        let grid = comparison_grid(&mus, &rhos, 1.0, 0.04, 3, 12);
        assert_eq!(grid.cells.len(), 100);
        for cell in &grid.cells {
            let cell = cell.as_ref().unwrap();
            assert!(cell.welfare_loss() <= 1e-9, "{cell:?}");
        }
        let c = grid.cell(2, 3).as_ref().unwrap();
        assert_eq!((c.mu0, c.rho0), (mus[2], rhos[3]));
    }

    #[test]
    fn grid_flags_bad_cells() {
        let grid = comparison_grid(&[0.5, 1.5], &[0.2], 1.0, 0.04, 2, 6);
        assert!(grid.cells[0].is_ok());
        assert!(grid.cells[1].is_err());
        assert_eq!(grid.ok_cells().count(), 1);
    }
}
