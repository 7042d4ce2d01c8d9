//! Run configuration read from TOML.
//!
//! Every section is optional and falls back to documented defaults; unknown
//! keys are rejected. Validation errors name the offending key path.

use serde::{Deserialize, Serialize};
use supplyfrag_core::{BasalMode, BetaParams, EconomyParams, PlannerOptions};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub economy: EconomySection,
    #[serde(default)]
    pub chain: ChainSection,
    #[serde(default)]
    pub planner: PlannerSection,
    #[serde(default)]
    pub simulation: SimulationSection,
    #[serde(default)]
    pub perfect_info: PerfectInfoSection,
    #[serde(default)]
    pub compare: CompareSection,
    #[serde(default)]
    pub figure: FigureSection,
    #[serde(default)]
    pub output: OutputSection,
}

pub const DEFAULT_SEED: u64 = 20_240_601;

/// Marginal-cost presets: `rc = 0.02` ("low") and `rc = 0.08` ("high").
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostPreset {
    Low,
    High,
}

impl CostPreset {
    pub fn rc(self) -> f64 {
        match self {
            CostPreset::Low => 0.02,
            CostPreset::High => 0.08,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EconomySection {
    #[serde(default = "one_usize")]
    pub k: usize,
    #[serde(default = "one_f64")]
    pub pi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<CostPreset>,
    #[serde(default = "half")]
    pub mu0: f64,
    #[serde(default = "default_rho0")]
    pub rho0: f64,
}

impl Default for EconomySection {
    fn default() -> Self {
        EconomySection {
            k: 1,
            pi: 1.0,
            c: None,
            preset: None,
            mu0: 0.5,
            rho0: default_rho0(),
        }
    }
}

fn one_usize() -> usize {
    1
}
fn one_f64() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn default_rho0() -> f64 {
    0.1
}

pub(crate) fn open_unit(key: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{key}: {v} must lie strictly between 0 and 1")))
    }
}

fn positive(key: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{key}: {v} must be positive")))
    }
}

impl EconomySection {
    /// Sourcing cost `c`, from the explicit value or the preset (`c = 2 rc pi`).
    pub fn cost(&self) -> Result<f64, CliError> {
        match (self.c, self.preset) {
            (Some(_), Some(_)) => Err(CliError::Config(
                "economy: set either c or preset, not both".into(),
            )),
            (Some(c), None) => positive("economy.c", c),
            (None, preset) => Ok(2.0 * preset.unwrap_or(CostPreset::Low).rc() * self.pi),
        }
    }

    pub fn rc(&self) -> Result<f64, CliError> {
        Ok(0.5 * self.cost()? / positive("economy.pi", self.pi)?)
    }

    pub fn base(&self) -> Result<BetaParams, CliError> {
        let mu0 = open_unit("economy.mu0", self.mu0)?;
        let rho0 = open_unit("economy.rho0", self.rho0)?;
        BetaParams::new(mu0, rho0).map_err(|e| CliError::Config(format!("economy: {e}")))
    }

    pub fn params(&self) -> Result<EconomyParams, CliError> {
        if self.k == 0 {
            return Err(CliError::Config("economy.k: must be at least 1".into()));
        }
        let pi = positive("economy.pi", self.pi)?;
        EconomyParams::new(self.k, pi, self.cost()?, self.base()?)
            .map_err(|e| CliError::Config(format!("economy: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    #[serde(default = "default_max_layers")]
    pub max_layers: usize,
}

fn default_max_layers() -> usize {
    supplyfrag_core::DEFAULT_MAX_LAYERS
}

impl Default for ChainSection {
    fn default() -> Self {
        ChainSection {
            max_layers: default_max_layers(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerSection {
    #[serde(default = "default_s_max")]
    pub s_max: u64,
    #[serde(default = "default_state_cap")]
    pub state_cap: usize,
}

fn default_s_max() -> u64 {
    PlannerOptions::default().s_max
}
fn default_state_cap() -> usize {
    PlannerOptions::default().state_cap
}

impl Default for PlannerSection {
    fn default() -> Self {
        PlannerSection {
            s_max: default_s_max(),
            state_cap: default_state_cap(),
        }
    }
}

impl PlannerSection {
    pub fn options(&self) -> Result<PlannerOptions, CliError> {
        if self.s_max == 0 {
            return Err(CliError::Config("planner.s_max: must be at least 1".into()));
        }
        if self.state_cap == 0 {
            return Err(CliError::Config("planner.state_cap: must be positive".into()));
        }
        Ok(PlannerOptions {
            s_max: self.s_max,
            state_cap: self.state_cap,
            ..PlannerOptions::default()
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeName {
    CommonDraw,
    IidDraw,
    FixedVector,
}

/// Basal mode from its name and an optional vector of probabilities.
pub(crate) fn basal_mode(
    section: &str,
    mode: ModeName,
    fixed: &Option<Vec<f64>>,
) -> Result<BasalMode, CliError> {
    match (mode, fixed) {
        (ModeName::FixedVector, Some(v)) => Ok(BasalMode::FixedVector(v.clone())),
        (ModeName::FixedVector, None) => Err(CliError::Config(format!(
            "{section}.fixed: required when mode = \"fixed-vector\""
        ))),
        (_, Some(_)) => Err(CliError::Config(format!(
            "{section}.fixed: only allowed when mode = \"fixed-vector\""
        ))),
        (ModeName::CommonDraw, None) => Ok(BasalMode::CommonDraw),
        (ModeName::IidDraw, None) => Ok(BasalMode::IidDraw),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkKind {
    Tree,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    #[serde(default = "tree")]
    pub network: NetworkKind,
    /// Sources per firm in layers 1..=K.
    #[serde(default = "default_s")]
    pub s: Vec<u64>,
    /// Firms per layer (basal first), random networks only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<Vec<usize>>,
    #[serde(default = "common_draw")]
    pub mode: ModeName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed: Option<Vec<f64>>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub track_firms: bool,
}

fn tree() -> NetworkKind {
    NetworkKind::Tree
}
fn default_s() -> Vec<u64> {
    vec![2, 2]
}
fn common_draw() -> ModeName {
    ModeName::CommonDraw
}
fn iid_draw() -> ModeName {
    ModeName::IidDraw
}
fn default_trials() -> u64 {
    10_000
}

impl Default for SimulationSection {
    fn default() -> Self {
        SimulationSection {
            network: NetworkKind::Tree,
            s: default_s(),
            m: None,
            mode: ModeName::CommonDraw,
            fixed: None,
            trials: default_trials(),
            track_firms: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerfectInfoSection {
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_s1")]
    pub s1: usize,
    #[serde(default = "iid_draw")]
    pub mode: ModeName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed: Option<Vec<f64>>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub verify_downstream: bool,
}

fn default_m() -> usize {
    10
}
fn default_s1() -> usize {
    2
}

impl Default for PerfectInfoSection {
    fn default() -> Self {
        PerfectInfoSection {
            m: default_m(),
            s1: default_s1(),
            mode: ModeName::IidDraw,
            fixed: None,
            trials: default_trials(),
            verify_downstream: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_compare_s")]
    pub s: Vec<usize>,
    #[serde(default = "iid_draw")]
    pub mode: ModeName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed: Option<Vec<f64>>,
    #[serde(default = "default_trials")]
    pub trials: u64,
}

fn default_compare_s() -> Vec<usize> {
    vec![2, 2]
}

impl Default for CompareSection {
    fn default() -> Self {
        CompareSection {
            m: default_m(),
            s: default_compare_s(),
            mode: ModeName::IidDraw,
            fixed: None,
            trials: default_trials(),
        }
    }
}

/// An explicit list of points or an inclusive range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    List(Vec<f64>),
    Range {
        start: f64,
        stop: f64,
        points: usize,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        log: bool,
    },
}

impl GridSpec {
    fn range(start: f64, stop: f64, points: usize) -> Self {
        GridSpec::Range {
            start,
            stop,
            points,
            log: false,
        }
    }

    pub fn values(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let v = match self {
            GridSpec::List(v) => v.clone(),
            GridSpec::Range {
                start,
                stop,
                points,
                log,
            } => {
                if *points == 0 {
                    return Err(CliError::Config(format!("{key}.points: must be positive")));
                }
                if *log && !(*start > 0.0 && *stop > 0.0) {
                    return Err(CliError::Config(format!("{key}: log grids need positive ends")));
                }
                let (a, b) = if *log { (start.ln(), stop.ln()) } else { (*start, *stop) };
                let step = if *points > 1 { (b - a) / (*points - 1) as f64 } else { 0.0 };
                (0..*points)
                    .map(|i| {
                        let x = if i + 1 == *points && *points > 1 { b } else { a + step * i as f64 };
                        if *log {
                            x.exp()
                        } else {
                            x
                        }
                    })
                    .collect()
            }
        };
        if v.is_empty() {
            return Err(CliError::Config(format!("{key}: grid is empty")));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(CliError::Config(format!("{key}: grid has non-finite values")));
        }
        Ok(v)
    }

    /// Values that must be strictly increasing and inside `(0, 1)`.
    pub fn unit_values(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let v = self.values(key)?;
        for &x in &v {
            open_unit(key, x)?;
        }
        if v.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Config(format!("{key}: grid must be strictly increasing")));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureSection {
    /// Mean axis for s-no-corr, limit and the welfare grids.
    #[serde(default = "default_mu_grid")]
    pub mu0: GridSpec,
    /// Correlation axis for risk-mapping, s-corr, crit and the welfare grids.
    #[serde(default = "default_rho_grid")]
    pub rho0: GridSpec,
    /// Source counts plotted as series in risk-mapping.
    #[serde(default = "default_series_s")]
    pub s: Vec<u64>,
    /// Upstream diversification levels plotted in upstream-risk-mapping;
    /// the first entry is the fixed level in risk-mapping.
    #[serde(default = "default_upstream")]
    pub upstream: Vec<u64>,
    /// Marginal-cost series for s-no-corr, s-corr and crit.
    #[serde(default = "default_rc_series")]
    pub rc: Vec<f64>,
    /// Correlation series for limit.
    #[serde(default = "default_limit_rho")]
    pub limit_rho0: Vec<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_mu_grid() -> GridSpec {
    GridSpec::range(0.01, 0.99, 99)
}
fn default_rho_grid() -> GridSpec {
    GridSpec::range(0.01, 0.98, 50)
}
fn default_series_s() -> Vec<u64> {
    vec![2, 3, 4]
}
fn default_upstream() -> Vec<u64> {
    vec![2, 4, 8]
}
fn default_rc_series() -> Vec<f64> {
    vec![CostPreset::Low.rc(), CostPreset::High.rc()]
}
fn default_limit_rho() -> Vec<f64> {
    vec![1e-9, 0.05, 0.3]
}
fn default_tol() -> f64 {
    1e-6
}

impl Default for FigureSection {
    fn default() -> Self {
        FigureSection {
            mu0: default_mu_grid(),
            rho0: default_rho_grid(),
            s: default_series_s(),
            upstream: default_upstream(),
            rc: default_rc_series(),
            limit_rho0: default_limit_rho(),
            tol: default_tol(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }
}
