//! Sourcing when firms observe the realised disruption probability of every
//! potential supplier.
//!
//! All layer-1 firms then contract the same `s1` safest basal firms (ties go
//! to the lowest index), so they are disrupted together or not at all, and
//! every later layer single-sources. The opaque benchmark draws supplier sets
//! at random instead.

use rand::seq::index::sample;
use rayon::prelude::*;

use crate::dist_core::BetaParams;
use crate::error::{Error, Result};
use crate::firm_policy::single_layer_sourcing;
use crate::mc_sim::{bernoulli_all, BasalDrawer, BasalMode};
use crate::rng::substream;

/// Correlation used to stand in for perfectly correlated inputs.
pub const NEAR_PERFECT_RHO: f64 = 1.0 - 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PerfectInfoSetup {
    /// Firms per layer, basal layer included.
    pub m: usize,
    pub k: usize,
    pub s1: usize,
    pub mode: BasalMode,
    pub base: BetaParams,
    pub trials: u64,
    pub seed: u64,
    /// `(pi, c)`: also re-derive the downstream choice numerically.
    pub verify_downstream: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerfectInfoOutcome {
    pub trials: u64,
    pub all_fail: u64,
    pub none_fail: u64,
    pub mixed: u64,
    /// Disrupted fraction of the last layer, averaged over trials.
    pub firm_fail_freq: f64,
    /// Numerically optimal downstream choice with perfectly correlated
    /// inputs, when verification was requested.
    pub downstream_choice: Option<u64>,
}

impl PerfectInfoSetup {
    fn validate(&self) -> Result<()> {
        if self.k == 0 || self.trials == 0 {
            return Err(Error::InvalidArgument("K and trials must be positive".into()));
        }
        if !(self.s1 >= 1 && self.s1 <= self.m) {
            return Err(Error::InvalidArgument(format!(
                "need 1 <= s1 <= m, got s1 = {} and m = {}",
                self.s1, self.m
            )));
        }
        self.mode.validate(self.m)
    }
}

/// Indices of the `s` smallest entries, ties by lowest index.
pub fn safest_suppliers(p: &[f64], s: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]).then(a.cmp(&b)));
    order.truncate(s);
    order.sort_unstable();
    order
}

/// Per-layer disrupted counts (layers 1..=K) for one trial of each regime
/// on common random numbers: the same basal probabilities, basal outcomes
/// and downstream wiring.
fn paired_trial(
    m: usize,
    s_vec: &[usize],
    drawer: &BasalDrawer,
    seed: u64,
    t: u64,
) -> (Vec<u64>, Vec<u64>) {
    let mut rng = substream(seed, t);
    let mut p = Vec::new();
    drawer.probabilities(m, &mut rng, &mut p);
    let basal = bernoulli_all(&p, &mut rng);

    let chosen = safest_suppliers(&p, s_vec[0]);
    let informed_hit = chosen.iter().all(|&j| basal[j]);
    let mut informed = vec![informed_hit; m];
    let mut opaque: Vec<bool> = (0..m)
        .map(|_| sample(&mut rng, m, s_vec[0]).into_iter().all(|j| basal[j]))
        .collect();

    let mut counts_i = Vec::with_capacity(s_vec.len());
    let mut counts_o = Vec::with_capacity(s_vec.len());
    counts_i.push(informed.iter().filter(|&&d| d).count() as u64);
    counts_o.push(opaque.iter().filter(|&&d| d).count() as u64);
    for &s in &s_vec[1..] {
        let sets: Vec<Vec<usize>> = (0..m).map(|_| sample(&mut rng, m, s).into_vec()).collect();
        informed = sets.iter().map(|set| set.iter().all(|&j| informed[j])).collect();
        opaque = sets.iter().map(|set| set.iter().all(|&j| opaque[j])).collect();
        counts_i.push(informed.iter().filter(|&&d| d).count() as u64);
        counts_o.push(opaque.iter().filter(|&&d| d).count() as u64);
    }
    (counts_i, counts_o)
}

pub fn simulate_perfect_info(setup: &PerfectInfoSetup) -> Result<PerfectInfoOutcome> {
    setup.validate()?;
    let m = setup.m;
    let drawer = BasalDrawer::new(&setup.mode, &setup.base);
    let mut s_vec = vec![1usize; setup.k];
    s_vec[0] = setup.s1;
    let last = setup.k - 1;

    let (all_fail, none_fail, mixed, disrupted) = (0..setup.trials)
        .into_par_iter()
        .map(|t| {
            let (informed, _) = paired_trial(m, &s_vec, &drawer, setup.seed, t);
            let d = informed[last];
            (
                (d == m as u64) as u64,
                (d == 0) as u64,
                (d != 0 && d != m as u64) as u64,
                d,
            )
        })
        .reduce(
            || (0, 0, 0, 0),
            |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2, a.3 + b.3),
        );
    let firm_fail_freq = disrupted as f64 / (setup.trials as f64 * m as f64);

    let downstream_choice = match setup.verify_downstream {
        Some((pi, c)) => {
            let mu = firm_fail_freq.clamp(1e-9, 1.0 - 1e-9);
            let inputs = BetaParams::new(mu, NEAR_PERFECT_RHO)?;
            Some(single_layer_sourcing(&inputs, pi, c).optimal)
        }
        None => None,
    };
    Ok(PerfectInfoOutcome {
        trials: setup.trials,
        all_fail,
        none_fail,
        mixed,
        firm_fail_freq,
        downstream_choice,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeComparison {
    pub trials: u64,
    /// Per-firm disruption frequency for layers 1..=K.
    pub perfect: Vec<f64>,
    pub opaque: Vec<f64>,
    /// `perfect - opaque` per layer.
    pub difference: Vec<f64>,
    /// Standard error of the paired difference.
    pub se: Vec<f64>,
}

/// Perfect information against random sourcing with the same source counts
/// `s_vec`, on common random numbers.
pub fn compare_with_opaque(
    m: usize,
    s_vec: &[usize],
    mode: &BasalMode,
    base: &BetaParams,
    trials: u64,
    seed: u64,
) -> Result<RegimeComparison> {
    if s_vec.is_empty() || trials < 2 {
        return Err(Error::InvalidArgument("need K >= 1 and at least two trials".into()));
    }
    if s_vec.iter().any(|&s| s == 0 || s > m) {
        return Err(Error::InvalidArgument(format!("source counts must lie in 1..={m}")));
    }
    mode.validate(m)?;
    let drawer = BasalDrawer::new(mode, base);
    let k = s_vec.len();
    type Sums = (Vec<u64>, Vec<u64>, Vec<i64>, Vec<u128>);
    let zero = || -> Sums { (vec![0; k], vec![0; k], vec![0; k], vec![0; k]) };
    let (sum_i, sum_o, sum_d, sum_d2) = (0..trials)
        .into_par_iter()
        .fold(zero, |mut acc: Sums, t| {
            let (ci, co) = paired_trial(m, s_vec, &drawer, seed, t);
            for l in 0..k {
                let d = ci[l] as i64 - co[l] as i64;
                acc.0[l] += ci[l];
                acc.1[l] += co[l];
                acc.2[l] += d;
                acc.3[l] += (d * d) as u128;
            }
            acc
        })
        .reduce(zero, |mut a, b| {
            for l in 0..k {
                a.0[l] += b.0[l];
                a.1[l] += b.1[l];
                a.2[l] += b.2[l];
                a.3[l] += b.3[l];
            }
            a
        });
    let n = trials as f64;
    let scale = n * m as f64;
    let perfect: Vec<f64> = sum_i.iter().map(|&x| x as f64 / scale).collect();
    let opaque: Vec<f64> = sum_o.iter().map(|&x| x as f64 / scale).collect();
    let difference = perfect.iter().zip(&opaque).map(|(a, b)| a - b).collect();
    let se = (0..k)
        .map(|l| {
            let mean = sum_d[l] as f64 / n;
            let var = (sum_d2[l] as f64 - n * mean * mean) / (n - 1.0);
            (var.max(0.0) / n).sqrt() / m as f64
        })
        .collect();
    Ok(RegimeComparison {
        trials,
        perfect,
        opaque,
        difference,
        se,
    })
}

/// Exact layer-1 disruption probability under perfect information for known
/// basal probabilities: the product of the `s` smallest.
pub fn perfect_info_layer1_risk(p: &[f64], s: usize) -> Result<f64> {
    check_exact(p, s)?;
    Ok(safest_suppliers(p, s).iter().map(|&j| p[j]).product())
}

/// Exact layer-1 disruption probability under random sourcing: the average
/// product over all `s`-subsets.
pub fn opaque_layer1_risk(p: &[f64], s: usize) -> Result<f64> {
    check_exact(p, s)?;
    fn walk(p: &[f64], start: usize, left: usize, acc: f64, sum: &mut f64, count: &mut u64) {
        if left == 0 {
            *sum += acc;
            *count += 1;
            return;
        }
        for j in start..=p.len() - left {
            walk(p, j + 1, left - 1, acc * p[j], sum, count);
        }
    }
    let (mut sum, mut count) = (0.0, 0u64);
    walk(p, 0, s, 1.0, &mut sum, &mut count);
    Ok(sum / count as f64)
}

fn check_exact(p: &[f64], s: usize) -> Result<()> {
    if p.len() > 30 {
        return Err(Error::InvalidArgument("exact enumeration limited to 30 firms".into()));
    }
    if s == 0 || s > p.len() {
        return Err(Error::InvalidArgument(format!("need 1 <= s <= {}", p.len())));
    }
    BasalMode::FixedVector(p.to_vec()).validate(p.len())
}

/// Draws `trials` iid basal vectors and returns the empirical mean and
/// standard error of their minimum.
pub fn minimum_probability_mc(m: usize, base: &BetaParams, trials: u64, seed: u64) -> (f64, f64) {
    let mode = BasalMode::IidDraw;
    let drawer = BasalDrawer::new(&mode, base);
    let mins: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream(seed, t);
            let mut p = Vec::new();
            drawer.probabilities(m, &mut rng, &mut p);
            p.into_iter().fold(1.0, f64::min)
        })
        .collect();
    let n = trials as f64;
    let mean = mins.iter().sum::<f64>() / n;
    let var = mins.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
