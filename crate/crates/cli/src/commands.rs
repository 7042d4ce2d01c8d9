//! Analysis commands. Each returns a TOML document with a `meta` table, the
//! effective configuration under `config` and the outputs under `result`.

use serde::{Deserialize, Serialize};
use supplyfrag_core::dist_core::{betapower_mean, BetaPowerParams};
use supplyfrag_core::firm_policy::shutdown_threshold;
use supplyfrag_core::mc_sim::{build_random_network, build_tree_network, run_trials};
use supplyfrag_core::perfect_info::{compare_with_opaque, simulate_perfect_info, PerfectInfoSetup};
use supplyfrag_core::planner::{decentralized_welfare, planner_solve};
use supplyfrag_core::propagate_chain;
use supplyfrag_core::rng::RNG_ALGORITHM;

use crate::config::{basal_mode, NetworkKind, RunConfig};
use crate::error::CliError;

pub const TOOL: &str = "supplyfrag";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Propagate,
    Planner,
    Simulate,
    PerfectInfo,
    Compare,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Propagate => "propagate",
            Command::Planner => "planner",
            Command::Simulate => "simulate",
            Command::PerfectInfo => "perfect-info",
            Command::Compare => "compare",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub rng: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Document<R> {
    pub meta: Meta,
    pub config: RunConfig,
    pub result: R,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerOut {
    pub k: usize,
    pub s: u64,
    pub diversification: u64,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagateResult {
    pub mu0: f64,
    pub rho0: f64,
    pub rc: f64,
    pub shutdown_threshold: f64,
    pub mu_bar: f64,
    pub fragile: bool,
    pub converged: bool,
    pub welfare: f64,
    pub layers: Vec<LayerOut>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerResult {
    pub s_seq: Vec<u64>,
    pub value: f64,
    pub welfare: f64,
    pub mu_traj: Vec<f64>,
    pub mu_bar: f64,
    pub hit_s_max: bool,
    pub decentralized_welfare: f64,
    pub decentralized_mu_bar: f64,
    pub welfare_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateResult {
    pub basal_mode: String,
    pub trials: u64,
    pub layer_sizes: Vec<usize>,
    pub layer_fraction: Vec<f64>,
    pub layer_se: Vec<f64>,
    /// Tree-limit mean disruption `E[X^(S_k)]` per layer.
    pub analytic: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub firm_frequency: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerfectInfoResult {
    pub trials: u64,
    pub all_fail: u64,
    pub none_fail: u64,
    pub mixed: u64,
    pub firm_fail_freq: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub downstream_choice: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareResult {
    pub trials: u64,
    pub perfect: Vec<f64>,
    pub opaque: Vec<f64>,
    pub difference: Vec<f64>,
    pub se: Vec<f64>,
}

fn render<R: Serialize>(command: Command, cfg: &RunConfig, result: R) -> Result<String, CliError> {
    let doc = Document {
        meta: Meta {
            tool: TOOL.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.name().into(),
            rng: RNG_ALGORITHM.into(),
        },
        config: cfg.clone(),
        result,
    };
    toml::to_string(&doc).map_err(|e| CliError::Io(format!("cannot serialise result: {e}")))
}

pub fn execute(command: Command, cfg: &RunConfig) -> Result<String, CliError> {
    match command {
        Command::Propagate => render(command, cfg, propagate(cfg)?),
        Command::Planner => render(command, cfg, planner(cfg)?),
        Command::Simulate => render(command, cfg, simulate(cfg)?),
        Command::PerfectInfo => render(command, cfg, perfect_info(cfg)?),
        Command::Compare => render(command, cfg, compare(cfg)?),
    }
}

pub fn propagate(cfg: &RunConfig) -> Result<PropagateResult, CliError> {
    let econ = cfg.economy.params()?;
    if cfg.chain.max_layers == 0 {
        return Err(CliError::Config("chain.max_layers: must be positive".into()));
    }
    let traj = propagate_chain(&econ, cfg.chain.max_layers)?;
    Ok(PropagateResult {
        mu0: econ.base().mu(),
        rho0: econ.base().rho(),
        rc: econ.rc(),
        shutdown_threshold: shutdown_threshold(econ.rc())?,
        mu_bar: traj.mu_bar,
        fragile: traj.fragile,
        converged: traj.converged,
        welfare: decentralized_welfare(&traj, &econ),
        layers: traj
            .layers
            .iter()
            .map(|l| LayerOut {
                k: l.k,
                s: l.s,
                diversification: l.diversification,
                mu: l.mu,
            })
            .collect(),
    })
}

pub fn planner(cfg: &RunConfig) -> Result<PlannerResult, CliError> {
    let econ = cfg.economy.params()?;
    let opts = cfg.planner.options()?;
    let plan = planner_solve(&econ, &opts)?;
    let traj = propagate_chain(&econ, cfg.chain.max_layers.max(econ.k()))?;
    let w = decentralized_welfare(&traj, &econ);
    Ok(PlannerResult {
        mu_bar: plan.mu_bar(),
        s_seq: plan.s_seq,
        value: plan.value,
        welfare: plan.welfare,
        mu_traj: plan.mu_traj,
        hit_s_max: plan.hit_s_max,
        decentralized_welfare: w,
        decentralized_mu_bar: traj.mu_bar,
        welfare_loss: w - plan.welfare,
    })
}

pub fn simulate(cfg: &RunConfig) -> Result<SimulateResult, CliError> {
    let sim = &cfg.simulation;
    let base = cfg.economy.base()?;
    if sim.s.is_empty() || sim.s.contains(&0) {
        return Err(CliError::Config("simulation.s: need at least one entry, all >= 1".into()));
    }
    if sim.trials == 0 {
        return Err(CliError::Config("simulation.trials: must be positive".into()));
    }
    let net = match (sim.network, &sim.m) {
        (NetworkKind::Tree, None) => build_tree_network(&sim.s)?,
        (NetworkKind::Tree, Some(_)) => {
            return Err(CliError::Config("simulation.m: not used by tree networks".into()))
        }
        (NetworkKind::Random, Some(m)) => build_random_network(m, &sim.s, cfg.seed())
            .map_err(|e| CliError::Config(format!("simulation.m: {e}")))?,
        (NetworkKind::Random, None) => {
            return Err(CliError::Config("simulation.m: required for random networks".into()))
        }
    };
    let mode = basal_mode("simulation", sim.mode, &sim.fixed)?;
    let report = run_trials(&net, &mode, &base, sim.trials, cfg.seed(), sim.track_firms)?;
    let mut analytic = vec![base.mu()];
    let mut upstream = 1.0;
    for &s in &sim.s {
        upstream *= s as f64;
        analytic.push(betapower_mean(&BetaPowerParams::new(base, upstream)?));
    }
    Ok(SimulateResult {
        basal_mode: report.basal_mode,
        trials: report.trials,
        layer_sizes: net.sizes().to_vec(),
        layer_fraction: report.layer_fraction,
        layer_se: report.layer_se,
        analytic,
        firm_frequency: report.firm_frequency,
    })
}

pub fn perfect_info(cfg: &RunConfig) -> Result<PerfectInfoResult, CliError> {
    let section = &cfg.perfect_info;
    let econ = cfg.economy.params()?;
    let setup = PerfectInfoSetup {
        m: section.m,
        k: econ.k(),
        s1: section.s1,
        mode: basal_mode("perfect_info", section.mode, &section.fixed)?,
        base: econ.base(),
        trials: section.trials,
        seed: cfg.seed(),
        verify_downstream: section.verify_downstream.then(|| (econ.pi(), econ.c())),
    };
    let out = simulate_perfect_info(&setup)
        .map_err(|e| CliError::Config(format!("perfect_info: {e}")))?;
    Ok(PerfectInfoResult {
        trials: out.trials,
        all_fail: out.all_fail,
        none_fail: out.none_fail,
        mixed: out.mixed,
        firm_fail_freq: out.firm_fail_freq,
        downstream_choice: out.downstream_choice,
    })
}

pub fn compare(cfg: &RunConfig) -> Result<CompareResult, CliError> {
    let section = &cfg.compare;
    let base = cfg.economy.base()?;
    let mode = basal_mode("compare", section.mode, &section.fixed)?;
    let out = compare_with_opaque(section.m, &section.s, &mode, &base, section.trials, cfg.seed())
        .map_err(|e| CliError::Config(format!("compare: {e}")))?;
    Ok(CompareResult {
        trials: out.trials,
        perfect: out.perfect,
        opaque: out.opaque,
        difference: out.difference,
        se: out.se,
    })
}
