//! Run configuration. Layers, lowest first: built-in defaults, the config file,
//! the input's `[config]` table, command-line flags.

use std::path::Path;

use qle_core::optembed::OptConfig;
use qle_core::qle::QleConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const CONFIG_ENV: &str = "QLE_CONFIG";
pub const DEFAULT_N_THETA: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub n_theta: usize,
    pub energy: QleConfig,
    pub optimal: OptConfig,
    pub verify: VerifyConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self { n_theta: DEFAULT_N_THETA, energy: QleConfig::default(), optimal: OptConfig::default(), verify: VerifyConfig::default() }
    }
}

/// Tolerances of the invariant table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub det_tol: f64,
    pub closed_form_tol: f64,
    pub linearity_tol: f64,
    pub invariance_tol: f64,
    pub equivariance_tol: f64,
    pub connection_tol: f64,
    pub embedding_tol: f64,
    pub finite_radius_tol: f64,
    pub response_tol: f64,
    pub decay_slack: f64,
    /// Residual sup norms below this multiple of the data scale count as converged.
    pub decay_floor: f64,
    pub identity_tol: f64,
    pub roundtrip_tol: f64,
    pub perturbations: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            det_tol: 1e-12,
            closed_form_tol: 1e-9,
            linearity_tol: 1e-9,
            invariance_tol: 1e-6,
            equivariance_tol: 1e-6,
            connection_tol: 1e-7,
            embedding_tol: 1e-8,
            finite_radius_tol: 1e-5,
            response_tol: 1e-8,
            decay_slack: 0.2,
            decay_floor: 1e-13,
            identity_tol: 1e-7,
            roundtrip_tol: 1e-12,
            perturbations: 50,
        }
    }
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

pub fn read_table(path: &Path) -> CliResult<toml::Table> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    text.parse::<toml::Table>().map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

impl Config {
    /// Defaults overlaid with each table in turn.
    pub fn layered(tables: impl IntoIterator<Item = toml::Table>) -> CliResult<Self> {
        let mut acc = toml::Table::new();
        for t in tables {
            merge(&mut acc, t);
        }
        let cfg: Config = acc.try_into().map_err(|e: toml::de::Error| CliError::input(format!("config: {}", e.message())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.n_theta < 4 {
            return Err(CliError::input(format!("config.n_theta: {} is below the minimum 4", self.n_theta)));
        }
        for (name, ladder) in [("energy.ladder", &self.energy.ladder), ("optimal.ladder", &self.optimal.ladder)] {
            if ladder.len() < 3 || ladder.iter().any(|r| !(r.is_finite() && *r > 0.0)) || ladder.windows(2).any(|w| w[1] <= w[0]) {
                return Err(CliError::input(format!("config.{name}: need at least 3 increasing positive radii")));
            }
        }
        Ok(())
    }

    /// Applies `--tol`: the route-agreement and limit tolerances.
    pub fn set_tol(&mut self, tol: f64) -> CliResult<()> {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(CliError::input(format!("--tol: {tol} is not a positive number")));
        }
        self.energy.route_tol = tol;
        self.energy.limit_tol = tol;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_layers_give_defaults() {
        assert_eq!(Config::layered([]).unwrap(), Config::default());
    }

    #[test]
    fn later_layers_override_nested_keys() {
        let a: toml::Table = "n_theta = 24\n[energy]\nexponent_tol = 0.2\n".parse().unwrap();
        let b: toml::Table = "[energy]\nroute_tol = 1e-6\n".parse().unwrap();
        let cfg = Config::layered([a, b]).unwrap();
        assert_eq!(cfg.n_theta, 24);
        assert_eq!(cfg.energy.exponent_tol, 0.2);
        assert_eq!(cfg.energy.route_tol, 1e-6);
        assert_eq!(cfg.energy.ladder, QleConfig::default().ladder);
    }

    #[test]
    fn unknown_key_rejected() {
        let a: toml::Table = "n_thetas = 24\n".parse().unwrap();
        assert!(matches!(Config::layered([a]), Err(CliError::Input(_))));
    }

    #[test]
    fn bad_ladder_rejected() {
        let a: toml::Table = "[optimal]\nladder = [100.0, 50.0, 400.0]\n".parse().unwrap();
        assert!(Config::layered([a]).is_err());
    }
}
