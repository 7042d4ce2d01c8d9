//! Monte Carlo on explicit finite networks.
//!
//! Layer 0 holds the basal firms. A firm in layer `k >= 1` is disrupted iff
//! every one of its suppliers in layer `k - 1` is. Basal firms are disrupted
//! independently given their probabilities, which come from a [`BasalMode`].
//!
//! Under [`BasalMode::CommonDraw`] a single `p ~ Beta` is shared by all basal
//! firms, the reading under which the tree analytics hold exactly.
//! [`BasalMode::IidDraw`] gives every basal firm its own `p`.

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;

use crate::dist_core::{betapower_mean, betapower_quantile, BetaParams, BetaPowerParams, BetaPowerSampler};
use crate::error::{Error, Result};
use crate::rng::{substream, TrialRng, WIRING_STREAM};

pub const MAX_BASAL_FIRMS: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub enum BasalMode {
    CommonDraw,
    IidDraw,
    FixedVector(Vec<f64>),
}

impl BasalMode {
    pub fn tag(&self) -> &'static str {
        match self {
            BasalMode::CommonDraw => "common-draw",
            BasalMode::IidDraw => "iid-draw",
            BasalMode::FixedVector(_) => "fixed-vector",
        }
    }

    pub(crate) fn validate(&self, basal: usize) -> Result<()> {
        if let BasalMode::FixedVector(p) = self {
            if p.len() != basal {
                return Err(Error::InvalidArgument(format!(
                    "fixed basal vector has {} entries for {basal} basal firms",
                    p.len()
                )));
            }
            if let Some(&bad) = p.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                return Err(Error::domain("basal probability", bad, "0 <= p <= 1"));
            }
        }
        Ok(())
    }
}

/// Draws basal disruption probabilities. For the common draw the shared `p`
/// is returned as well.
pub(crate) struct BasalDrawer<'a> {
    mode: &'a BasalMode,
    sampler: BetaPowerSampler,
}

impl<'a> BasalDrawer<'a> {
    pub(crate) fn new(mode: &'a BasalMode, base: &BetaParams) -> Self {
        let unit = BetaPowerParams::new(*base, 1.0).expect("power one is valid");
        BasalDrawer {
            mode,
            sampler: BetaPowerSampler::new(&unit),
        }
    }

    pub(crate) fn probabilities(&self, n: usize, rng: &mut TrialRng, out: &mut Vec<f64>) -> Option<f64> {
        out.clear();
        match self.mode {
            BasalMode::CommonDraw => {
                let p = self.sampler.sample(rng);
                out.resize(n, p);
                Some(p)
            }
            BasalMode::IidDraw => {
                out.extend((0..n).map(|_| self.sampler.sample(rng)));
                None
            }
            BasalMode::FixedVector(v) => {
                out.extend_from_slice(v);
                None
            }
        }
    }
}

pub(crate) fn bernoulli_all(p: &[f64], rng: &mut TrialRng) -> Vec<bool> {
    p.iter().map(|&q| rng.random::<f64>() < q).collect()
}

/// Firm counts per layer (basal first) and, for every firm above the basal
/// layer, the sorted indices of its suppliers one layer down.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    sizes: Vec<usize>,
    suppliers: Vec<Vec<Vec<usize>>>,
}

impl Network {
    /// Checks the supplier lists against the layer sizes.
    pub fn new(sizes: Vec<usize>, suppliers: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        if sizes.len() != suppliers.len() + 1 {
            return Err(Error::InvalidArgument("one supplier table per sourcing layer".into()));
        }
        for (k, table) in suppliers.iter().enumerate() {
            if table.len() != sizes[k + 1] {
                return Err(Error::InvalidArgument(format!("layer {} size mismatch", k + 1)));
            }
            if table.iter().flatten().any(|&j| j >= sizes[k]) {
                return Err(Error::InvalidArgument(format!(
                    "supplier index out of range in layer {}",
                    k + 1
                )));
            }
        }
        Ok(Network { sizes, suppliers })
    }

    /// Number of sourcing layers `K`.
    pub fn depth(&self) -> usize {
        self.suppliers.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn basal_count(&self) -> usize {
        self.sizes[0]
    }

    /// Suppliers of firm `i` in layer `k >= 1`.
    pub fn suppliers(&self, k: usize, i: usize) -> &[usize] {
        &self.suppliers[k - 1][i]
    }

    /// Distinct basal firms reachable from firm `i` in layer `k`.
    pub fn basal_ancestors(&self, k: usize, i: usize) -> Vec<usize> {
        let mut frontier = vec![i];
        for layer in (1..=k).rev() {
            let mut next: Vec<usize> = frontier
                .iter()
                .flat_map(|&f| self.suppliers(layer, f).iter().copied())
                .collect();
            next.sort_unstable();
            next.dedup();
            frontier = next;
        }
        frontier
    }
}

/// Disjoint supplier tree with one top firm: firm `i` of layer `k` sources
/// firms `i s_k .. (i + 1) s_k` of layer `k - 1`.
pub fn build_tree_network(s_vec: &[u64]) -> Result<Network> {
    if s_vec.is_empty() {
        return Err(Error::InvalidArgument("at least one sourcing layer".into()));
    }
    if s_vec.contains(&0) {
        return Err(Error::InvalidArgument("tree sourcing counts must be >= 1".into()));
    }
    let basal: u128 = s_vec.iter().map(|&s| s as u128).product();
    if basal > MAX_BASAL_FIRMS as u128 {
        return Err(Error::NetworkTooLarge {
            basal,
            limit: MAX_BASAL_FIRMS,
        });
    }
    let k = s_vec.len();
    let mut sizes = vec![1usize; k + 1];
    for layer in (0..k).rev() {
        sizes[layer] = sizes[layer + 1] * s_vec[layer] as usize;
    }
    let suppliers = (1..=k)
        .map(|layer| {
            let s = s_vec[layer - 1] as usize;
            (0..sizes[layer]).map(|i| (i * s..(i + 1) * s).collect()).collect()
        })
        .collect();
    Network::new(sizes, suppliers)
}

fn random_wiring(m_vec: &[usize], s_vec: &[u64], rng: &mut TrialRng) -> Result<Network> {
    if m_vec.len() != s_vec.len() + 1 {
        return Err(Error::InvalidArgument("need K + 1 layer sizes for K sourcing counts".into()));
    }
    for (k, &s) in s_vec.iter().enumerate() {
        if s == 0 || s as usize > m_vec[k] {
            return Err(Error::InvalidArgument(format!(
                "layer {} sources {s} of {} firms",
                k + 1,
                m_vec[k]
            )));
        }
    }
    let suppliers = (1..m_vec.len())
        .map(|layer| {
            let (below, s) = (m_vec[layer - 1], s_vec[layer - 1] as usize);
            (0..m_vec[layer])
                .map(|_| {
                    let mut set = sample(rng, below, s).into_vec();
                    set.sort_unstable();
                    set
                })
                .collect()
        })
        .collect();
    Network::new(m_vec.to_vec(), suppliers)
}

/// Every firm draws a uniform random `s_k`-subset of the layer below.
pub fn build_random_network(m_vec: &[usize], s_vec: &[u64], seed: u64) -> Result<Network> {
    random_wiring(m_vec, s_vec, &mut substream(seed, WIRING_STREAM))
}

/// Disruption state of every layer, basal first.
pub fn propagate(net: &Network, basal_disrupted: &[bool]) -> Vec<Vec<bool>> {
    assert_eq!(basal_disrupted.len(), net.basal_count());
    let mut out = Vec::with_capacity(net.depth() + 1);
    out.push(basal_disrupted.to_vec());
    for k in 1..=net.depth() {
        let below = &out[k - 1];
        let layer: Vec<bool> = net.suppliers[k - 1]
            .iter()
            .map(|set| set.iter().all(|&j| below[j]))
            .collect();
        out.push(layer);
    }
    out
}

/// One trial: basal probabilities, basal Bernoulli draws, propagation.
/// Returns the layer states and the common draw when there is one.
pub fn simulate_trial(
    net: &Network,
    mode: &BasalMode,
    base: &BetaParams,
    rng: &mut TrialRng,
) -> Result<(Vec<Vec<bool>>, Option<f64>)> {
    mode.validate(net.basal_count())?;
    let drawer = BasalDrawer::new(mode, base);
    let mut p = Vec::new();
    let common = drawer.probabilities(net.basal_count(), rng, &mut p);
    Ok((propagate(net, &bernoulli_all(&p, rng)), common))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub basal_mode: String,
    pub trials: u64,
    /// Mean disrupted fraction per layer, basal first.
    pub layer_fraction: Vec<f64>,
    /// `sqrt(p (1 - p) / trials)` per layer.
    pub layer_se: Vec<f64>,
    /// Disruption frequency of each firm, when requested.
    pub firm_frequency: Option<Vec<Vec<f64>>>,
}

#[derive(Clone)]
struct Tally {
    layer: Vec<u64>,
    firms: Option<Vec<Vec<u64>>>,
}

impl Tally {
    fn new(net: &Network, track: bool) -> Self {
        Tally {
            layer: vec![0; net.depth() + 1],
            firms: track.then(|| net.sizes().iter().map(|&m| vec![0; m]).collect()),
        }
    }

    fn add(mut self, state: &[Vec<bool>]) -> Self {
        for (k, layer) in state.iter().enumerate() {
            self.layer[k] += layer.iter().filter(|&&d| d).count() as u64;
            if let Some(f) = self.firms.as_mut() {
                for (slot, &d) in f[k].iter_mut().zip(layer) {
                    *slot += d as u64;
                }
            }
        }
        self
    }

    fn merge(mut self, other: Tally) -> Self {
        for (a, b) in self.layer.iter_mut().zip(other.layer) {
            *a += b;
        }
        if let (Some(a), Some(b)) = (self.firms.as_mut(), other.firms) {
            for (ra, rb) in a.iter_mut().zip(b) {
                for (x, y) in ra.iter_mut().zip(rb) {
                    *x += y;
                }
            }
        }
        self
    }
}

/// Runs `trials` independent trials; trial `t` uses substream `t` of `seed`,
/// so the report does not depend on the worker count.
pub fn run_trials(
    net: &Network,
    mode: &BasalMode,
    base: &BetaParams,
    trials: u64,
    seed: u64,
    track_firms: bool,
) -> Result<SimulationReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    mode.validate(net.basal_count())?;
    let drawer = BasalDrawer::new(mode, base);
    let empty = Tally::new(net, track_firms);
    let tally = (0..trials)
        .into_par_iter()
        .fold(
            || empty.clone(),
            |acc, t| {
                let mut rng = substream(seed, t);
                let mut p = Vec::new();
                drawer.probabilities(net.basal_count(), &mut rng, &mut p);
                let state = propagate(net, &bernoulli_all(&p, &mut rng));
                acc.add(&state)
            },
        )
        .reduce(|| empty.clone(), Tally::merge);

    let n = trials as f64;
    let layer_fraction: Vec<f64> = tally
        .layer
        .iter()
        .zip(net.sizes())
        .map(|(&d, &m)| d as f64 / (n * m as f64))
        .collect();
    let layer_se = layer_fraction.iter().map(|&q| (q * (1.0 - q) / n).sqrt()).collect();
    let firm_frequency = tally
        .firms
        .map(|f| f.into_iter().map(|row| row.into_iter().map(|d| d as f64 / n).collect()).collect());
    Ok(SimulationReport {
        basal_mode: mode.tag().to_string(),
        trials,
        layer_fraction,
        layer_se,
        firm_frequency,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeabilityReport {
    /// Joint outcome frequencies of the two subsets, indexed by bit pattern.
    pub joint_a: Vec<f64>,
    pub joint_b: Vec<f64>,
    pub tv_distance: f64,
    pub p_value: f64,
}

const PERMUTATIONS: usize = 199;

fn total_variation(a: &[u64], b: &[u64], n: f64) -> f64 {
    0.5 * a.iter().zip(b).map(|(&x, &y)| (x as f64 - y as f64).abs()).sum::<f64>() / n
}

/// Compares the joint disruption pattern of firms `0..size` with that of
/// firms `size..2 size` in `layer` of a random network that is redrawn every
/// trial. The p-value comes from randomly swapping the two patterns within
/// trials.
#[allow(clippy::too_many_arguments)]
pub fn exchangeability_check(
    m_vec: &[usize],
    s_vec: &[u64],
    mode: &BasalMode,
    base: &BetaParams,
    layer: usize,
    subset_size: usize,
    trials: u64,
    seed: u64,
) -> Result<ExchangeabilityReport> {
    if layer == 0 || layer >= m_vec.len() {
        return Err(Error::InvalidArgument(format!("layer {layer} is not a sourcing layer")));
    }
    if subset_size == 0 || subset_size > 16 || 2 * subset_size > m_vec[layer] {
        return Err(Error::InvalidArgument(format!(
            "two disjoint subsets of size {subset_size} do not fit in layer {layer}"
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    mode.validate(m_vec[0])?;
    let drawer = BasalDrawer::new(mode, base);
    let pattern = |state: &[bool], offset: usize| {
        (0..subset_size).fold(0u32, |acc, i| acc | ((state[offset + i] as u32) << i))
    };
    let pairs: Vec<(u32, u32)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream(seed, t);
            let net = random_wiring(m_vec, s_vec, &mut rng)?;
            let mut p = Vec::new();
            drawer.probabilities(net.basal_count(), &mut rng, &mut p);
            let state = propagate(&net, &bernoulli_all(&p, &mut rng));
            Ok((pattern(&state[layer], 0), pattern(&state[layer], subset_size)))
        })
        .collect::<Result<_>>()?;

    let cells = 1usize << subset_size;
    let counts = |swap: &dyn Fn(usize) -> bool| {
        let mut a = vec![0u64; cells];
        let mut b = vec![0u64; cells];
        for (t, &(x, y)) in pairs.iter().enumerate() {
            let (x, y) = if swap(t) { (y, x) } else { (x, y) };
            a[x as usize] += 1;
            b[y as usize] += 1;
        }
        (a, b)
    };
    let n = trials as f64;
    let (a, b) = counts(&|_| false);
    let observed = total_variation(&a, &b, n);

    let mut perm_rng = substream(seed, WIRING_STREAM + 1);
    let mut exceed = 0usize;
    let mut flips = vec![false; pairs.len()];
    for _ in 0..PERMUTATIONS {
        flips.iter_mut().for_each(|f| *f = perm_rng.random::<bool>());
        let (pa, pb) = counts(&|t| flips[t]);
        if total_variation(&pa, &pb, n) >= observed {
            exceed += 1;
        }
    }
    Ok(ExchangeabilityReport {
        joint_a: a.iter().map(|&x| x as f64 / n).collect(),
        joint_b: b.iter().map(|&x| x as f64 / n).collect(),
        tv_distance: observed,
        p_value: (exceed + 1) as f64 / (PERMUTATIONS + 1) as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalBin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
    /// Empirical disruption frequency of the top firm in this bin.
    pub frequency: f64,
    /// Mean of `p^(S_K)` over the draws in this bin.
    pub expected: f64,
    pub se: f64,
}

/// Bins the common draw `p` into `bins` equal-probability bins and compares
/// the top firm's disruption frequency with `p^(S_K)` inside each bin.
pub fn conditional_tree_check(
    s_vec: &[u64],
    base: &BetaParams,
    bins: usize,
    trials: u64,
    seed: u64,
) -> Result<Vec<ConditionalBin>> {
    if bins == 0 || trials == 0 {
        return Err(Error::InvalidArgument("bins and trials must be positive".into()));
    }
    let net = build_tree_network(s_vec)?;
    let total: f64 = s_vec.iter().map(|&s| s as f64).product();
    let unit = BetaPowerParams::new(*base, 1.0)?;
    let mut edges: Vec<f64> = (1..bins)
        .map(|i| betapower_quantile(&unit, i as f64 / bins as f64))
        .collect();
    edges.insert(0, 0.0);
    edges.push(1.0);

    let mode = BasalMode::CommonDraw;
    let draws: Vec<(f64, bool)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream(seed, t);
            let (state, p) = simulate_trial(&net, &mode, base, &mut rng)?;
            Ok((p.expect("common draw"), state[net.depth()][0]))
        })
        .collect::<Result<_>>()?;

    let mut count = vec![0u64; bins];
    let mut hits = vec![0u64; bins];
    let mut expected = vec![0.0f64; bins];
    for &(p, hit) in &draws {
        let b = edges[1..bins].partition_point(|&e| e <= p);
        count[b] += 1;
        hits[b] += hit as u64;
        expected[b] += p.powf(total);
    }
    Ok((0..bins)
        .map(|b| {
            let n = count[b].max(1) as f64;
            let e = expected[b] / n;
            ConditionalBin {
                lo: edges[b],
                hi: edges[b + 1],
                count: count[b],
                frequency: hits[b] as f64 / n,
                expected: e,
                se: (e * (1.0 - e) / n).sqrt(),
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub m: usize,
    /// Mean of `fraction_K - p^(S_K)` over trials.
    pub deviation: f64,
    pub se: f64,
    pub analytic: f64,
}

/// Random networks with `m` firms in every layer, redrawn each trial, under
/// the common basal draw. Each trial contributes the top-layer disrupted
/// fraction minus its tree value `p^(S_K)` given the same draw.
pub fn finite_m_convergence(
    m_list: &[usize],
    s_vec: &[u64],
    base: &BetaParams,
    trials: u64,
    seed: u64,
) -> Result<Vec<ConvergenceRow>> {
    if m_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("m list must be strictly increasing".into()));
    }
    if trials < 2 {
        return Err(Error::InvalidArgument("need at least two trials".into()));
    }
    let k = s_vec.len();
    let total: f64 = s_vec.iter().map(|&s| s as f64).product();
    let analytic = betapower_mean(&BetaPowerParams::new(*base, total)?);
    let mode = BasalMode::CommonDraw;
    let drawer = BasalDrawer::new(&mode, base);
    m_list
        .iter()
        .map(|&m| {
            let m_vec = vec![m; k + 1];
            let diffs: Vec<f64> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = substream(seed, t);
                    let net = random_wiring(&m_vec, s_vec, &mut rng)?;
                    let mut p = Vec::new();
                    let common = drawer.probabilities(m, &mut rng, &mut p).expect("common draw");
                    let state = propagate(&net, &bernoulli_all(&p, &mut rng));
                    let hit = state[k].iter().filter(|&&d| d).count() as f64 / m as f64;
                    Ok(hit - common.powf(total))
                })
                .collect::<Result<_>>()?;
            let n = trials as f64;
            let mean = diffs.iter().sum::<f64>() / n;
            let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
            Ok(ConvergenceRow {
                m,
                deviation: mean,
                se: (var / n).sqrt(),
                analytic,
            })
        })
        .collect()
}
