//! Endogenous supply-chain formation under opacity.
//!
//! The crate is organised bottom-up:
//!
//! * [`dist_core`]: rising factorials, the Beta law in mean/overdispersion
//!   form, the BetaPower family and the risk-reduction factor η.
//! * [`firm_policy`]: marginal profits and the representative firm's
//!   desired/optimal number of suppliers.
//! * [`chain_dynamics`]: the layer-indexed dynamical system, fixed points,
//!   endogenous fragility and critical thresholds.
//! * [`planner`]: the social planner's backward induction and welfare
//!   comparisons.
//! * [`perfect_info`]: the perfect-information regime.
//! * [`mc_sim`]: explicit finite networks and Monte Carlo checks of the
//!   analytics.

pub mod chain_dynamics;
pub mod dist_core;
mod error;
pub mod firm_policy;
pub mod mc_sim;
pub mod perfect_info;
pub mod planner;
pub mod quadrature;
pub mod rng;
mod roots;

pub use chain_dynamics::{propagate_chain, ChainTrajectory, LayerState, DEFAULT_MAX_LAYERS};
pub use dist_core::{BetaParams, BetaPowerParams};
pub use error::{Error, Result};
pub use firm_policy::{EconomyParams, SourcingDecision};
pub use mc_sim::{BasalMode, Network, SimulationReport};
pub use perfect_info::PerfectInfoOutcome;
pub use planner::{PlannerOptions, PlannerSolution, WelfareGrid};
