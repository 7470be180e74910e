//! Check records and the three report renderings.

use serde::Serialize;

use super::config::{ReportFormat, VerifyConfig};
use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// Acceptance criterion number; `None` for diagnostics.
    pub criterion: Option<u8>,
    pub status: Status,
    pub observed: String,
    pub expected: String,
    pub tolerance: String,
}

impl Check {
    pub fn new(
        name: &str,
        criterion: Option<u8>,
        ok: bool,
        observed: impl Into<String>,
        expected: impl Into<String>,
        tolerance: impl Into<String>,
    ) -> Self {
        Self {
            name: name.to_string(),
            criterion,
            status: Status::from_bool(ok),
            observed: observed.into(),
            expected: expected.into(),
            tolerance: tolerance.into(),
        }
    }

    /// A check that could not be evaluated.
    pub fn errored(name: &str, criterion: Option<u8>, err: impl std::fmt::Display) -> Self {
        Self::new(name, criterion, false, format!("error: {err}"), "-", "-")
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: observed {}; expected {}; tolerance {}",
            self.status.label(),
            self.name,
            self.observed,
            self.expected,
            self.tolerance
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Environment {
    pub version: String,
    pub order: usize,
    pub oracle_tol: f64,
    pub s_tol: f64,
    pub fixtures: String,
}

impl Environment {
    pub fn from_config(cfg: &VerifyConfig) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            order: cfg.order,
            oracle_tol: cfg.oracle_tol,
            s_tol: cfg.s_tol,
            fixtures: cfg
                .fixtures
                .as_ref()
                .map_or_else(|| "builtin".to_string(), |p| p.display().to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub generated_at: String,
    pub environment: Environment,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    /// Sorts the checks by name so that output order does not depend on
    /// evaluation order.
    pub fn new(environment: Environment, mut checks: Vec<Check>, generated_at: String) -> Self {
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        Self { generated_at, environment, checks }
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&c.line());
            out.push('\n');
        }
        let failed = self.failures().count();
        out.push_str(&format!(
            "{} checks, {} passed, {} failed\n",
            self.checks.len(),
            self.checks.len() - failed,
            failed
        ));
        out
    }

    pub fn to_csv(&self) -> Result<String, HarnessError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["name", "criterion", "status", "observed", "expected", "tolerance"])?;
        for c in &self.checks {
            let criterion = c.criterion.map(|n| n.to_string()).unwrap_or_default();
            w.write_record([
                c.name.as_str(),
                criterion.as_str(),
                c.status.label(),
                c.observed.as_str(),
                c.expected.as_str(),
                c.tolerance.as_str(),
            ])?;
        }
        finish_csv(w)
    }

    pub fn to_json(&self) -> Result<String, HarnessError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn render(&self, format: ReportFormat) -> Result<String, HarnessError> {
        match format {
            ReportFormat::Text => Ok(self.to_text()),
            ReportFormat::Csv => self.to_csv(),
            ReportFormat::Json => self.to_json().map(|s| s + "\n"),
        }
    }
}

pub(crate) fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String, HarnessError> {
    let bytes = w.into_inner().map_err(|e| HarnessError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| HarnessError::Output(e.to_string()))
}
