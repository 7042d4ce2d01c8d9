//! Figure data as comma-separated tables.
//!
//! Wide figures have the x-axis in the first column and one column per
//! series; the two welfare figures are long tables over the `(mu0, rho0)`
//! grid. Numbers carry 12 significant digits; `nan` marks points where no
//! value exists (no fragility transition, failed grid cell).

use supplyfrag_core::chain_dynamics::{critical_mu, limit_map};
use supplyfrag_core::dist_core::eta;
use supplyfrag_core::firm_policy::{optimal_sourcing_uncorrelated, single_layer_sourcing};
use supplyfrag_core::planner::{comparison_grid, WelfareCell};
use supplyfrag_core::{BetaParams, Error};

use crate::config::RunConfig;
use crate::error::CliError;

pub const FIGURES: [&str; 8] = [
    "risk-mapping",
    "upstream-risk-mapping",
    "s-no-corr",
    "s-corr",
    "limit",
    "crit",
    "risk-difference",
    "welfare-loss",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| fmt_sig12(x)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

/// Decimal text with at most 12 significant digits that parses back to the
/// rounded value.
pub fn fmt_sig12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let r: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    let a = r.abs();
    if (1e-4..1e15).contains(&a) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

fn label(prefix: &str, v: f64) -> String {
    format!("{prefix}{}", fmt_sig12(v))
}

pub fn figure(name: &str, cfg: &RunConfig) -> Result<Table, CliError> {
    match name {
        "risk-mapping" => risk_mapping(cfg),
        "upstream-risk-mapping" => upstream_risk_mapping(cfg),
        "s-no-corr" => s_no_corr(cfg),
        "s-corr" => s_corr(cfg),
        "limit" => limit(cfg),
        "crit" => crit(cfg),
        "risk-difference" => welfare_table(cfg, true),
        "welfare-loss" => welfare_table(cfg, false),
        other => Err(CliError::Config(format!(
            "unknown figure {other:?}; expected one of {}",
            FIGURES.join(", ")
        ))),
    }
}

fn first_positive(key: &str, v: &[u64]) -> Result<u64, CliError> {
    match v.first() {
        Some(&x) if x >= 1 && v.iter().all(|&y| y >= 1) => Ok(x),
        _ => Err(CliError::Config(format!("{key}: need at least one entry, all >= 1"))),
    }
}

fn rc_series(cfg: &RunConfig) -> Result<Vec<f64>, CliError> {
    if cfg.figure.rc.is_empty() || cfg.figure.rc.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return Err(CliError::Config("figure.rc: need values in (0, 1)".into()));
    }
    Ok(cfg.figure.rc.clone())
}

fn risk_mapping(cfg: &RunConfig) -> Result<Table, CliError> {
    let upstream = first_positive("figure.upstream", &cfg.figure.upstream)?;
    first_positive("figure.s", &cfg.figure.s)?;
    let mu0 = cfg.economy.base()?.mu();
    let rhos = cfg.figure.rho0.unit_values("figure.rho0")?;
    let mut header = vec!["rho0".to_string()];
    header.extend(cfg.figure.s.iter().map(|s| format!("eta_s{s}")));
    let rows = rhos
        .iter()
        .map(|&rho| {
            let base = BetaParams::new(mu0, rho)?;
            let mut row = vec![rho];
            for &s in &cfg.figure.s {
                row.push(eta(s, upstream, &base)?);
            }
            Ok(row)
        })
        .collect::<Result<_, Error>>()?;
    Ok(Table { header, rows })
}

fn upstream_risk_mapping(cfg: &RunConfig) -> Result<Table, CliError> {
    let s = first_positive("figure.s", &cfg.figure.s)?;
    first_positive("figure.upstream", &cfg.figure.upstream)?;
    let mu0 = cfg.economy.base()?.mu();
    let rhos = cfg.figure.rho0.unit_values("figure.rho0")?;
    let mut header = vec!["rho0".to_string()];
    header.extend(cfg.figure.upstream.iter().map(|u| format!("eta_S{u}")));
    let rows = rhos
        .iter()
        .map(|&rho| {
            let base = BetaParams::new(mu0, rho)?;
            let mut row = vec![rho];
            for &u in &cfg.figure.upstream {
                row.push(eta(s, u, &base)?);
            }
            Ok(row)
        })
        .collect::<Result<_, Error>>()?;
    Ok(Table { header, rows })
}

fn sourcing_header(x: &str, rcs: &[f64]) -> Vec<String> {
    let mut header = vec![x.to_string()];
    header.extend(rcs.iter().map(|&rc| label("desired_rc", rc)));
    header.extend(rcs.iter().map(|&rc| label("optimal_rc", rc)));
    header
}

fn s_no_corr(cfg: &RunConfig) -> Result<Table, CliError> {
    let rcs = rc_series(cfg)?;
    let pi = cfg.economy.params()?.pi();
    let mus = cfg.figure.mu0.unit_values("figure.mu0")?;
    let rows = mus
        .iter()
        .map(|&mu| {
            let decisions: Vec<_> = rcs
                .iter()
                .map(|&rc| optimal_sourcing_uncorrelated(mu, pi, 2.0 * rc * pi))
                .collect();
            let mut row = vec![mu];
            row.extend(decisions.iter().map(|d| d.desired));
            row.extend(decisions.iter().map(|d| d.optimal as f64));
            row
        })
        .collect();
    Ok(Table {
        header: sourcing_header("mu", &rcs),
        rows,
    })
}

fn s_corr(cfg: &RunConfig) -> Result<Table, CliError> {
    let rcs = rc_series(cfg)?;
    let econ = cfg.economy.params()?;
    let (pi, mu) = (econ.pi(), econ.base().mu());
    let rhos = cfg.figure.rho0.unit_values("figure.rho0")?;
    let rows = rhos
        .iter()
        .map(|&rho| {
            let supplier = BetaParams::new(mu, rho)?;
            let decisions: Vec<_> = rcs
                .iter()
                .map(|&rc| single_layer_sourcing(&supplier, pi, 2.0 * rc * pi))
                .collect();
            let mut row = vec![rho];
            row.extend(decisions.iter().map(|d| d.desired));
            row.extend(decisions.iter().map(|d| d.optimal as f64));
            Ok(row)
        })
        .collect::<Result<_, Error>>()?;
    Ok(Table {
        header: sourcing_header("rho0", &rcs),
        rows,
    })
}

fn limit(cfg: &RunConfig) -> Result<Table, CliError> {
    let econ = cfg.economy.params()?;
    let mus = cfg.figure.mu0.unit_values("figure.mu0")?;
    let series = &cfg.figure.limit_rho0;
    if series.is_empty() {
        return Err(CliError::Config("figure.limit_rho0: need at least one value".into()));
    }
    for &rho in series {
        crate::config::open_unit("figure.limit_rho0", rho)?;
    }
    let mut header = vec!["mu0".to_string()];
    header.extend(series.iter().map(|&rho| label("mu_bar_rho", rho)));
    let maps = series
        .iter()
        .map(|&rho| limit_map(&mus, rho, econ.pi(), econ.c()))
        .collect::<Result<Vec<_>, Error>>()?;
    let rows = (0..mus.len())
        .map(|i| {
            let mut row = vec![mus[i]];
            row.extend(maps.iter().map(|m| m[i].1));
            row
        })
        .collect();
    Ok(Table { header, rows })
}

fn crit(cfg: &RunConfig) -> Result<Table, CliError> {
    let rcs = rc_series(cfg)?;
    let pi = cfg.economy.params()?.pi();
    let tol = cfg.figure.tol;
    if !(tol > 0.0) {
        return Err(CliError::Config("figure.tol: must be positive".into()));
    }
    let rhos = cfg.figure.rho0.unit_values("figure.rho0")?;
    let mut header = vec!["rho0".to_string()];
    header.extend(rcs.iter().map(|&rc| label("mu_c_rc", rc)));
    let rows = rhos
        .iter()
        .map(|&rho| {
            let mut row = vec![rho];
            for &rc in &rcs {
                row.push(match critical_mu(rho, pi, 2.0 * rc * pi, tol) {
                    Ok(v) => v,
                    Err(Error::NoTransition(_)) | Err(Error::MultipleTransitions(_)) => f64::NAN,
                    Err(e) => return Err(e),
                });
            }
            Ok(row)
        })
        .collect::<Result<_, Error>>()?;
    Ok(Table { header, rows })
}

fn welfare_table(cfg: &RunConfig, risk: bool) -> Result<Table, CliError> {
    let econ = cfg.economy.params()?;
    let opts = cfg.planner.options()?;
    let mus = cfg.figure.mu0.unit_values("figure.mu0")?;
    let rhos = cfg.figure.rho0.unit_values("figure.rho0")?;
    let grid = comparison_grid(&mus, &rhos, econ.pi(), econ.c(), econ.k(), opts.s_max);
    let names: [&str; 3] = if risk {
        ["mu_bar", "mu_bar_planner", "risk_difference"]
    } else {
        ["welfare", "welfare_planner", "welfare_loss"]
    };
    let pick = |c: &WelfareCell| -> [f64; 3] {
        if risk {
            [c.mu_bar, c.mu_bar_planner, c.risk_difference()]
        } else {
            [c.welfare, c.welfare_planner, c.welfare_loss()]
        }
    };
    let mut header = vec!["mu0".to_string(), "rho0".to_string()];
    header.extend(names.iter().map(|s| s.to_string()));
    let mut rows = Vec::with_capacity(mus.len() * rhos.len());
    for (i, &mu0) in mus.iter().enumerate() {
        for (j, &rho0) in rhos.iter().enumerate() {
            let values = match grid.cell(i, j) {
                Ok(c) => pick(c),
                Err(e) => {
                    log::warn!("cell mu0 = {mu0}, rho0 = {rho0} failed: {e}");
                    [f64::NAN; 3]
                }
            };
            let mut row = vec![mu0, rho0];
            row.extend(values);
            rows.push(row);
        }
    }
    Ok(Table { header, rows })
}
