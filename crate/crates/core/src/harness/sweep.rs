//! Expansion-vs-oracle tables as CSV.
//!
//! Columns for `zero`: `x,p,oracle_log_m,u_oracle,` then `log_m_o{k}` and
//! `abs_err_o{k}` per order (errors in log m, i.e. relative errors of m),
//! then `note`.
//! Columns for `infinity`: `x,p,L,oracle_m,` then `m_o{k}` and
//! `abs_err_o{k}` per order, then `note`.
//! A row whose oracle or expansion fails keeps its `x,p` and carries the
//! error text in `note`.

use super::report::finish_csv;
use super::HarnessError;
use crate::infinity::ExpansionTable;
use crate::oracle;
use crate::zero;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepKind {
    Zero,
    Infinity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub xs: Vec<f64>,
    pub ps: Vec<f64>,
    pub orders: Vec<usize>,
    pub tol: f64,
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn header(spec: &SweepSpec) -> Vec<String> {
    let mut h: Vec<String> = match spec.kind {
        SweepKind::Zero => ["x", "p", "oracle_log_m", "u_oracle"],
        SweepKind::Infinity => ["x", "p", "L", "oracle_m"],
    }
    .iter()
    .map(|s| s.to_string())
    .collect();
    let value = match spec.kind {
        SweepKind::Zero => "log_m",
        SweepKind::Infinity => "m",
    };
    h.extend(spec.orders.iter().map(|k| format!("{value}_o{k}")));
    h.extend(spec.orders.iter().map(|k| format!("abs_err_o{k}")));
    h.push("note".into());
    h
}

fn zero_row(spec: &SweepSpec, x: f64, p: f64) -> Result<Vec<String>, String> {
    let w = oracle::quantile_log(x, p, spec.tol).map_err(|e| e.to_string())?.value;
    let u = (w - p.ln() / x).exp();
    let mut values = Vec::new();
    let mut errors = Vec::new();
    for &k in &spec.orders {
        let e = zero::eval_small_x_log(x, p, k).map_err(|e| e.to_string())?;
        values.push(num(e));
        errors.push(num((e - w).abs()));
    }
    let mut row = vec![num(w), num(u)];
    row.extend(values);
    row.extend(errors);
    Ok(row)
}

fn infinity_row(spec: &SweepSpec, table: &ExpansionTable, x: f64, p: f64) -> Result<Vec<String>, String> {
    let l = oracle::gaussian_quantile(p);
    let m = oracle::quantile(x, p, spec.tol).map_err(|e| e.to_string())?.value;
    let mut values = Vec::new();
    let mut errors = Vec::new();
    for &k in &spec.orders {
        let e = table.eval_expansion(x, l, k as i64).map_err(|e| e.to_string())?;
        values.push(num(e));
        errors.push(num((e - m).abs()));
    }
    let mut row = vec![num(l), num(m)];
    row.extend(values);
    row.extend(errors);
    Ok(row)
}

/// Deterministic CSV; an empty grid yields the header alone.
pub fn sweep(spec: &SweepSpec) -> Result<String, HarnessError> {
    if let Some(&p) = spec.ps.iter().find(|&&p| !(p > 0.0 && p < 1.0)) {
        return Err(HarnessError::Sweep(format!("p = {p} outside (0, 1)")));
    }
    let max_order = spec.orders.iter().copied().max().unwrap_or(0);
    if spec.kind == SweepKind::Zero && max_order > 2 {
        return Err(HarnessError::Sweep("small-x orders are 0, 1, 2".into()));
    }
    let table = match spec.kind {
        SweepKind::Infinity => Some(
            ExpansionTable::build(max_order.max(1)).map_err(|e| HarnessError::Sweep(e.to_string()))?,
        ),
        SweepKind::Zero => None,
    };
    let header = header(spec);
    let width = header.len();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header)?;
    for &x in &spec.xs {
        for &p in &spec.ps {
            let result = if !(x > 0.0 && x.is_finite()) {
                Err(format!("x = {x} must be positive"))
            } else {
                match &table {
                    Some(t) => infinity_row(spec, t, x, p),
                    None => zero_row(spec, x, p),
                }
            };
            let mut row = vec![x.to_string(), p.to_string()];
            match result {
                Ok(cells) => {
                    row.extend(cells);
                    row.push(String::new());
                }
                Err(note) => {
                    row.resize(width - 1, String::new());
                    row.push(note);
                }
            }
            w.write_record(&row)?;
        }
    }
    finish_csv(w)
}
