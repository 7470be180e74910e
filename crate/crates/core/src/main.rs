use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use gamma_quantile::harness::{self, ConfigOverrides, ReportFormat, SweepKind, SweepSpec, VerifyConfig};
use gamma_quantile::infinity::{ExpansionTable, DEFAULT_ORDER};
use gamma_quantile::oracle::{self, OracleError};
use gamma_quantile::zero::{self, ZeroError};

/// Gamma-distribution quantiles m_p(x) (scale 1): numeric oracle and the
/// asymptotic expansions at small and large shape x.
#[derive(Parser)]
#[command(name = "gamma-quantile", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum CoeffFormat {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Solve P(x, m) = p numerically; prints JSON {value, residual, method, iterations}.
    Quantile {
        #[arg(long, value_parser = positive)]
        x: f64,
        #[arg(long, value_parser = probability)]
        p: f64,
        /// Return log m_p(x) from the log-domain solver (x <= 0.5).
        #[arg(long)]
        log_domain: bool,
        #[arg(long, default_value_t = 1e-13, value_parser = positive)]
        tol: f64,
    },
    /// Exact coefficient polynomials a_k(L) and tau_n(L).
    Coeffs {
        #[arg(long, default_value_t = DEFAULT_ORDER)]
        order: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: CoeffFormat,
    },
    /// Small-x expansion of log m_p(x) (orders 0..2; no closed forms beyond).
    ExpandZero {
        #[arg(long, value_parser = positive)]
        x: f64,
        #[arg(long, value_parser = probability)]
        p: f64,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(0..=2))]
        order: u8,
    },
    /// Large-x expansion sum_{n=-2}^{order} tau_n(L_p) x^{-n/2}, with the oracle value.
    ExpandInfinity {
        #[arg(long, value_parser = positive)]
        x: f64,
        #[arg(long, value_parser = probability)]
        p: f64,
        #[arg(long, default_value_t = DEFAULT_ORDER)]
        order: usize,
    },
    /// Expansion-vs-oracle table as CSV.
    Sweep {
        #[arg(value_enum)]
        kind: SweepKind,
        /// Comma-separated shapes.
        #[arg(long, value_delimiter = ',')]
        x: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0.5")]
        p: Vec<f64>,
        /// Comma-separated orders (default 0,1,2 for zero, 0..=7 for infinity).
        #[arg(long, value_delimiter = ',')]
        orders: Option<Vec<usize>>,
        #[arg(long, default_value_t = 1e-13, value_parser = positive)]
        tol: f64,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance checks; exit status 1 if any fails.
    Verify {
        /// TOML file with any of: order, oracle_tol, s_tol, fixtures, format.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        order: Option<usize>,
        #[arg(long)]
        oracle_tol: Option<f64>,
        #[arg(long)]
        s_tol: Option<f64>,
        /// Replacement fixtures file.
        #[arg(long)]
        fixtures: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<ReportFormat>,
        /// Write the report to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} is not a positive finite number"))
    }
}

fn probability(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is not in (0, 1)"))
    }
}

enum Failure {
    Usage(String),
    Check(String),
}

const EXIT_CHECK: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn from_oracle(e: OracleError) -> Failure {
    match e {
        OracleError::Domain(_) | OracleError::RegimeError(_) => Failure::Usage(e.to_string()),
        other => Failure::Check(other.to_string()),
    }
}

fn from_zero(e: ZeroError) -> Failure {
    match e {
        ZeroError::Oracle(o) => from_oracle(o),
        ZeroError::Domain(_) | ZeroError::InvalidOrder(_) | ZeroError::NonPositiveArgument { .. } => {
            Failure::Usage(e.to_string())
        }
        other => Failure::Check(other.to_string()),
    }
}

fn print_json(v: &impl serde::Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(v).map_err(|e| Failure::Check(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn emit(text: &str, out: Option<PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => {
            std::fs::write(&path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn build_table(order: usize) -> Result<ExpansionTable, Failure> {
    if order > harness::config::MAX_ORDER {
        return Err(Failure::Usage(format!("order must be at most {}", harness::config::MAX_ORDER)));
    }
    ExpansionTable::build(order).map_err(|e| Failure::Check(e.to_string()))
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    match cli.command {
        Command::Quantile { x, p, log_domain, tol } => {
            let r = if log_domain { oracle::quantile_log(x, p, tol) } else { oracle::quantile(x, p, tol) };
            print_json(&r.map_err(from_oracle)?)?;
        }
        Command::Coeffs { order, format } => {
            let table = build_table(order)?;
            let listing = table.listing();
            match format {
                CoeffFormat::Json => print_json(&listing)?,
                CoeffFormat::Text => {
                    for a in &listing.a {
                        println!("a_{} = {}", a.k.unwrap_or_default(), a.poly);
                    }
                    for t in &listing.tau {
                        println!("tau_{} = {}", t.n.unwrap_or_default(), t.poly);
                    }
                }
            }
        }
        Command::ExpandZero { x, p, order } => {
            let coeffs = zero::default_coeffs();
            let log_m = coeffs.eval_log(x, p, order as usize).map_err(from_zero)?;
            let m = log_m.exp();
            let m = (m >= f64::MIN_POSITIVE).then_some(m);
            print_json(&json!({
                "x": x,
                "p": p,
                "order": order,
                "log_m": log_m,
                "m": m,
                "coefficients": coeffs,
            }))?;
        }
        Command::ExpandInfinity { x, p, order } => {
            let table = build_table(order)?;
            let l = oracle::gaussian_quantile(p);
            let value = table.eval_expansion(x, l, order as i64).map_err(|e| Failure::Usage(e.to_string()))?;
            let oracle_value = oracle::quantile(x, p, 1e-13).map_err(from_oracle)?.value;
            print_json(&json!({
                "x": x,
                "p": p,
                "L": l,
                "order": order,
                "value": value,
                "oracle": oracle_value,
                "abs_err": (value - oracle_value).abs(),
            }))?;
        }
        Command::Sweep { kind, x, p, orders, tol, out } => {
            let orders = orders.unwrap_or_else(|| match kind {
                SweepKind::Zero => vec![0, 1, 2],
                SweepKind::Infinity => (0..=DEFAULT_ORDER).collect(),
            });
            if kind == SweepKind::Infinity && orders.iter().any(|&k| k > harness::config::MAX_ORDER) {
                return Err(Failure::Usage(format!("orders must be at most {}", harness::config::MAX_ORDER)));
            }
            let spec = SweepSpec { kind, xs: x, ps: p, orders, tol };
            let csv = harness::sweep(&spec).map_err(|e| Failure::Usage(e.to_string()))?;
            emit(&csv, out)?;
        }
        Command::Verify { config, order, oracle_tol, s_tol, fixtures, format, out } => {
            let file = config
                .map(|path| ConfigOverrides::from_path(&path))
                .transpose()
                .map_err(|e| Failure::Usage(e.to_string()))?;
            let flags = ConfigOverrides { order, oracle_tol, s_tol, fixtures, format };
            let cfg = VerifyConfig::resolve(flags, file).map_err(|e| Failure::Usage(e.to_string()))?;
            let report = harness::run_verify(&cfg).map_err(|e| Failure::Usage(e.to_string()))?;
            let text = report.render(cfg.format).map_err(|e| Failure::Check(e.to_string()))?;
            emit(&text, out)?;
            if !report.all_passed() {
                return Ok(ExitCode::from(EXIT_CHECK));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CHECK)
        }
    }
}
