//! Verification settings: command-line flags over an optional TOML file over
//! defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::infinity::DEFAULT_ORDER;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Text,
    Csv,
    Json,
}

/// Every field optional; used both for the file and for flag overrides.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub order: Option<usize>,
    pub oracle_tol: Option<f64>,
    pub s_tol: Option<f64>,
    pub fixtures: Option<PathBuf>,
    pub format: Option<ReportFormat>,
}

impl ConfigOverrides {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// `self` wins wherever it is set.
    pub fn over(self, base: ConfigOverrides) -> ConfigOverrides {
        ConfigOverrides {
            order: self.order.or(base.order),
            oracle_tol: self.oracle_tol.or(base.oracle_tol),
            s_tol: self.s_tol.or(base.s_tol),
            fixtures: self.fixtures.or(base.fixtures),
            format: self.format.or(base.format),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyConfig {
    /// Expansion order `M` of the exact tables.
    pub order: usize,
    /// Residual tolerance of the quantile solvers.
    pub oracle_tol: f64,
    /// Absolute tolerance of the `s_q` quadratures.
    pub s_tol: f64,
    /// `None` selects the bundled fixtures.
    pub fixtures: Option<PathBuf>,
    pub format: ReportFormat,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            order: DEFAULT_ORDER,
            oracle_tol: 1e-14,
            s_tol: 1e-12,
            fixtures: None,
            format: ReportFormat::Text,
        }
    }
}

pub const MAX_ORDER: usize = 16;

impl VerifyConfig {
    pub fn resolve(flags: ConfigOverrides, file: Option<ConfigOverrides>) -> Result<Self, HarnessError> {
        let merged = flags.over(file.unwrap_or_default());
        let d = Self::default();
        let cfg = Self {
            order: merged.order.unwrap_or(d.order),
            oracle_tol: merged.oracle_tol.unwrap_or(d.oracle_tol),
            s_tol: merged.s_tol.unwrap_or(d.s_tol),
            fixtures: merged.fixtures,
            format: merged.format.unwrap_or(d.format),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.order < 2 || self.order > MAX_ORDER {
            return Err(HarnessError::Config(format!("order must lie in 2..={MAX_ORDER}, got {}", self.order)));
        }
        for (name, tol) in [("oracle_tol", self.oracle_tol), ("s_tol", self.s_tol)] {
            if !(tol > 0.0 && tol < 1e-3) {
                return Err(HarnessError::Config(format!("{name} must lie in (0, 1e-3), got {tol}")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let file = ConfigOverrides::from_toml("order = 4\ns_tol = 1e-10\nformat = \"json\"").unwrap();
        let flags = ConfigOverrides { order: Some(3), ..Default::default() };
        let cfg = VerifyConfig::resolve(flags, Some(file)).unwrap();
        assert_eq!(cfg.order, 3);
        assert_eq!(cfg.s_tol, 1e-10);
        assert_eq!(cfg.format, ReportFormat::Json);
        assert_eq!(cfg.oracle_tol, VerifyConfig::default().oracle_tol);
    }

    #[test]
    fn bad_config_is_rejected() {
        assert!(ConfigOverrides::from_toml("ordr = 3").is_err());
        assert!(ConfigOverrides::from_toml("order = \"x\"").is_err());
        let flags = ConfigOverrides { order: Some(1), ..Default::default() };
        assert!(VerifyConfig::resolve(flags, None).is_err());
        let flags = ConfigOverrides { s_tol: Some(-1.0), ..Default::default() };
        assert!(VerifyConfig::resolve(flags, None).is_err());
    }
}
