//! The `run`, `report` and `selftest` commands.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use bootbias::experiments::{self, Context, ExperimentConfig, ExperimentOutput};
use bootbias::Error;
use thiserror::Error as ThisError;

use crate::config::LoadedConfig;
use crate::emit;
use crate::selftest::{self, Check};
use crate::svg;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_EXPERIMENT: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, ThisError, Clone, PartialEq)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    /// Malformed input file other than a config.
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Experiment(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Input(_) => EXIT_CONFIG,
            CliError::Experiment(_) => EXIT_EXPERIMENT,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

/// Errors raised while setting up a run are the config's fault.
fn setup_error(e: Error) -> CliError {
    CliError::Config(e.to_string())
}

fn run_error(e: Error) -> CliError {
    match e {
        Error::Config { .. } | Error::Unknown { .. } => CliError::Config(e.to_string()),
        other => CliError::Experiment(other.to_string()),
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| io_error(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| io_error(path, e))
}

/// Validate the whole config and build every grid point without running
/// anything, so bad parameters surface as config errors.
pub fn check_config(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let registry = experiments::registry();
    let exp = registry.get(&cfg.kind).map_err(setup_error)?;
    cfg.validate().map_err(setup_error)?;
    exp.validate(cfg).map_err(setup_error)?;
    let ctx = Context::new(1).map_err(setup_error)?;
    for &n in &cfg.grid {
        ctx.point(cfg, n).map_err(setup_error)?;
    }
    Ok(())
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    /// Worker threads; `None` lets the pool decide.
    pub threads: Option<usize>,
}

/// Files written by a run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunFiles {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

fn console_lines(out: &ExperimentOutput) -> Vec<String> {
    let mut lines: Vec<String> = out.summaries.iter().map(emit::summary_line).collect();
    lines.extend(out.clt.iter().map(emit::clt_line));
    if let Some(fit) = &out.fit {
        lines.push(format!("rate fit: slope={:.4} r2={:.4}", fit.slope, fit.r2));
    }
    if !out.oracle.is_empty() {
        lines.push(emit::oracle_table(&out.oracle).trim_end().to_string());
    }
    lines
}

fn chart_points(cfg: &ExperimentConfig, out: &ExperimentOutput) -> (Vec<f64>, Vec<f64>) {
    out.summaries
        .iter()
        .filter(|s| s.k == cfg.k && !s.failed)
        .map(|s| (s.n as f64, s.rmse))
        .unzip()
}

/// Run the experiment described by the config at `path`, write its outputs
/// and print one line per grid point to `console`.
pub fn run(path: &Path, opts: &RunOptions, console: &mut dyn Write) -> Result<RunFiles, CliError> {
    let loaded = LoadedConfig::from_path(path)?;
    let mut cfg = loaded.file.to_experiment()?;
    if let Some(t) = opts.threads {
        cfg.threads = t;
    }
    check_config(&cfg)?;
    let out = experiments::run(&cfg).map_err(run_error)?;

    let out_dir = opts.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let paths = loaded.file.output_paths(&out_dir);
    let mut files = RunFiles::default();
    // render the chart first so a chart failure leaves no partial output
    let chart = match &paths.svg {
        Some(p) => {
            let (ns, rmses) = chart_points(&cfg, &out);
            let (text, _) = svg::rate_chart(&ns, &rmses)
                .map_err(|e| CliError::Experiment(format!("rate chart: {e}")))?;
            Some((p.clone(), text))
        }
        None => None,
    };
    if let Some(p) = &paths.csv {
        write_file(p, &emit::experiment_csv(&out))?;
        files.csv = Some(p.clone());
    }
    if let Some(p) = &paths.json {
        write_file(p, &emit::json_mirror(&loaded.raw, &out)?)?;
        files.json = Some(p.clone());
    }
    if let Some((p, text)) = chart {
        write_file(&p, &text)?;
        files.svg = Some(p);
    }

    let io = |e: std::io::Error| CliError::Io(format!("stdout: {e}"));
    for line in console_lines(&out) {
        writeln!(console, "{line}").map_err(io)?;
    }
    if out.failed() {
        let points = out.summaries.iter().filter(|s| s.failed).count();
        let oracle = out.oracle.iter().filter(|o| !o.pass).count();
        return Err(CliError::Experiment(format!(
            "experiment failed: {points} failed grid point rows, {oracle} failed oracle comparisons"
        )));
    }
    Ok(files)
}

/// Render the rate chart for a summary CSV. Only rows of the highest order
/// `k` in the file with a positive finite RMSE are plotted.
pub fn report(csv_path: &Path, svg_path: &Path, console: &mut dyn Write) -> Result<(), CliError> {
    let text = fs::read_to_string(csv_path).map_err(|e| io_error(csv_path, e))?;
    let rows = emit::parse_summary_csv(&text)?;
    let top = rows
        .iter()
        .map(|r| r.k)
        .max()
        .ok_or_else(|| CliError::Input(format!("{}: no data rows", csv_path.display())))?;
    let (ns, rmses): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.k == top && r.rmse().is_finite() && r.rmse() > 0.0)
        .map(|r| (r.n as f64, r.rmse()))
        .unzip();
    let (svg, fit) = svg::rate_chart(&ns, &rmses)?;
    write_file(svg_path, &svg)?;
    writeln!(
        console,
        "k={top} points={} slope={:.4} r2={:.4} -> {}",
        ns.len(),
        fit.slope,
        fit.r2,
        svg_path.display()
    )
    .map_err(|e| CliError::Io(format!("stdout: {e}")))?;
    Ok(())
}

/// Print every check and fail if any did.
pub fn report_checks(checks: &[Check], console: &mut dyn Write) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("stdout: {e}"));
    for c in checks {
        writeln!(console, "{}", c.line()).map_err(io)?;
    }
    let failed = checks.iter().filter(|c| !c.passed()).count();
    writeln!(console, "{} of {} checks passed", checks.len() - failed, checks.len()).map_err(io)?;
    if failed > 0 {
        return Err(CliError::Experiment(format!("{failed} self-test checks failed")));
    }
    Ok(())
}

pub fn selftest(console: &mut dyn Write) -> Result<(), CliError> {
    report_checks(&selftest::run_checks(), console)
}
