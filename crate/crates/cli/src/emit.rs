//! CSV, JSON and text emitters.
//!
//! Floats are written with Rust's shortest round-trip formatting, so reading
//! a file back yields the exact `f64` that was written.

use bootbias::experiments::{CltRow, ExperimentOutput, OracleRow, TrialSummary};
use serde::Serialize;
use serde_json::Value;

use crate::commands::CliError;

/// Frozen column order of the summary CSV.
pub const CSV_HEADER: &str = "n,d,k,bias,se_bias,sd,rmse,sqrt_n_rmse,sigma_f,d_k,aborts,seconds";

pub const CLT_HEADER: &str = "n,d,samples,w1,w2,xi_sq_mean,xi_sq_se,trace_sigma,seconds";

/// Shortest representation that parses back to the same value.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn summary_row(s: &TrialSummary) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        s.n,
        s.d,
        s.k,
        fmt_f64(s.bias),
        fmt_f64(s.se_bias),
        fmt_f64(s.sd),
        fmt_f64(s.rmse),
        fmt_f64(s.sqrt_n_rmse),
        fmt_f64(s.sigma_f),
        fmt_f64(s.d_k),
        s.aborts,
        fmt_f64(s.seconds),
    )
}

pub fn summary_csv(rows: &[TrialSummary]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for s in rows {
        out.push_str(&summary_row(s));
        out.push('\n');
    }
    out
}

pub fn clt_csv(rows: &[CltRow]) -> String {
    let mut out = String::from(CLT_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.n,
            r.d,
            r.samples,
            fmt_f64(r.w1),
            fmt_f64(r.w2),
            fmt_f64(r.xi_sq_mean),
            fmt_f64(r.xi_sq_se),
            fmt_f64(r.trace_sigma),
            fmt_f64(r.seconds),
        ));
    }
    out
}

/// CSV for whichever table the experiment produced.
pub fn experiment_csv(out: &ExperimentOutput) -> String {
    if out.summaries.is_empty() && !out.clt.is_empty() {
        clt_csv(&out.clt)
    } else {
        summary_csv(&out.summaries)
    }
}

#[derive(Serialize)]
struct JsonMirror<'a> {
    config: &'a Value,
    #[serde(flatten)]
    output: &'a ExperimentOutput,
}

/// The run output plus the config that produced it. Non-finite floats,
/// which JSON cannot represent, become `null`.
pub fn json_mirror(config: &Value, out: &ExperimentOutput) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(&JsonMirror {
        config,
        output: out,
    })
    .map_err(|e| CliError::Io(format!("cannot serialize results: {e}")))?;
    text.push('\n');
    Ok(text)
}

/// One console line per grid point.
pub fn summary_line(s: &TrialSummary) -> String {
    let mut line = format!(
        "n={} d={} k={} bias={:.4e} se={:.2e} rmse={:.4e} sqrt_n_rmse={:.4} d_K={:.4} aborts={}",
        s.n, s.d, s.k, s.bias, s.se_bias, s.rmse, s.sqrt_n_rmse, s.d_k, s.aborts
    );
    if s.failed {
        line.push_str(" FAILED");
    }
    line
}

pub fn clt_line(r: &CltRow) -> String {
    format!(
        "n={} d={} W1={:.4e} W2={:.4e} E|xi|^2={:.4}+-{:.2e} tr(Sigma)={:.4}",
        r.n, r.d, r.w1, r.w2, r.xi_sq_mean, r.xi_sq_se, r.trace_sigma
    )
}

/// Measured bias against the closed-form bias, one line per order.
pub fn oracle_table(rows: &[OracleRow]) -> String {
    let mut out = format!(
        "{:>8} {:>4} {:>3} {:>14} {:>12} {:>14} {:>6}\n",
        "n", "d", "k", "bias", "se", "oracle", "result"
    );
    for r in rows {
        out.push_str(&format!(
            "{:>8} {:>4} {:>3} {:>14.6e} {:>12.3e} {:>14.6e} {:>6}\n",
            r.n,
            r.d,
            r.k,
            r.bias,
            r.se_bias,
            r.oracle,
            if r.pass { "pass" } else { "FAIL" }
        ));
    }
    out
}

/// A row of a summary CSV, as read back by `report`.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub values: [f64; 7],
    pub aborts: usize,
    pub seconds: f64,
}

impl CsvRow {
    pub fn rmse(&self) -> f64 {
        self.values[3]
    }
}

/// Parse a summary CSV, insisting on the frozen header.
pub fn parse_summary_csv(text: &str) -> Result<Vec<CsvRow>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| malformed(format!("cannot read header: {e}")))?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header != CSV_HEADER {
        return Err(malformed(format!("expected header `{CSV_HEADER}`, got `{header}`")));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| malformed(format!("line {line}: {e}")))?;
        let int = |j: usize| -> Result<usize, CliError> {
            record[j]
                .parse()
                .map_err(|_| malformed(format!("line {line}: bad integer `{}`", &record[j])))
        };
        let float = |j: usize| -> Result<f64, CliError> {
            record[j]
                .parse()
                .map_err(|_| malformed(format!("line {line}: bad number `{}`", &record[j])))
        };
        let mut values = [0.0; 7];
        for (slot, j) in values.iter_mut().zip(3..10) {
            *slot = float(j)?;
        }
        rows.push(CsvRow {
            n: int(0)?,
            d: int(1)?,
            k: int(2)?,
            values,
            aborts: int(10)?,
            seconds: float(11)?,
        });
    }
    Ok(rows)
}

fn malformed(message: String) -> CliError {
    CliError::Input(format!("malformed CSV: {message}"))
}
