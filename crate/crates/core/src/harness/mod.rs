//! Verification suite, coefficient listings and expansion-vs-oracle sweeps.

pub mod checks;
pub mod config;
pub mod fixtures;
pub mod report;
pub mod sweep;

use thiserror::Error;

pub use checks::{Context, CHECKS};
pub use config::{ConfigOverrides, ReportFormat, VerifyConfig};
pub use fixtures::Fixtures;
pub use report::{Check, Environment, Status, VerificationReport};
pub use sweep::{sweep, SweepKind, SweepSpec};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("fixtures: {0}")]
    Fixture(String),
    #[error("output: {0}")]
    Output(String),
    #[error("sweep: {0}")]
    Sweep(String),
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        HarnessError::Output(e.to_string())
    }
}

impl From<serde_json::Error> for HarnessError {
    fn from(e: serde_json::Error) -> Self {
        HarnessError::Output(e.to_string())
    }
}

/// Loads the fixtures named by the config (bundled ones by default).
pub fn load_fixtures(config: &VerifyConfig) -> Result<Fixtures, HarnessError> {
    match &config.fixtures {
        Some(path) => Fixtures::from_path(path),
        None => Ok(Fixtures::builtin()),
    }
}

/// Runs the named checks concurrently; results come back in `names` order.
pub fn run_checks(ctx: &Context, names: &[&str]) -> Vec<Check> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = names
            .iter()
            .map(|&name| {
                scope.spawn(move || match checks::find(name) {
                    Some(f) => f(ctx),
                    None => Check::errored(name, None, "unknown check"),
                })
            })
            .collect();
        handles
            .into_iter()
            .zip(names)
            .map(|(h, &name)| h.join().unwrap_or_else(|_| Check::errored(name, None, "check panicked")))
            .collect()
    })
}

/// The full suite. The process exit status derives from
/// [`VerificationReport::all_passed`].
pub fn run_verify(config: &VerifyConfig) -> Result<VerificationReport, HarnessError> {
    config.validate()?;
    let fixtures = load_fixtures(config)?;
    let ctx = Context::new(config.clone(), fixtures);
    let names: Vec<&str> = CHECKS.iter().map(|(n, _)| *n).collect();
    let results = run_checks(&ctx, &names);
    let stamp = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
    Ok(VerificationReport::new(Environment::from_config(config), results, stamp))
}
