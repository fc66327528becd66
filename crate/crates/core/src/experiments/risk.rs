//! Risk, normality and rate-sweep experiments. All three measure the error
//! distribution of `f_k(theta_hat)` at each grid point; they differ in
//! their preconditions and post-processing.

use super::{
    rate_fit, summarize, ChainKind, Context, Experiment, ExperimentConfig, ExperimentOutput,
    GridPoint, Timer, TrialSummary, MIN_NORMALITY_REPLICATES,
};
use crate::bootstrap::{corrected_values, BootstrapKernel, Kernel, MAX_ABORT_FRACTION};
use crate::error::{Error, Result};
use crate::gaussian::{sigma_f, SurrogateKernel, TruncationRule};
use crate::rng::{StreamKey, DATA_STREAM};

/// Orders reported for a config: `[k]`, or `[0, k]` with plug-in rows.
fn reported_orders(cfg: &ExperimentConfig) -> Vec<usize> {
    if cfg.include_plugin && cfg.k > 0 {
        vec![0, cfg.k]
    } else {
        vec![cfg.k]
    }
}

struct Replicate {
    errors: Vec<f64>,
    aborted_chains: usize,
}

fn replicate(
    cfg: &ExperimentConfig,
    point: &GridPoint,
    kernel: &dyn Kernel,
    f_theta: f64,
    orders: &[usize],
    key: StreamKey,
) -> Result<Replicate> {
    let data = point
        .model
        .sample_data(&point.theta, point.n, &mut key.stream(DATA_STREAM))?;
    let theta_hat = point.model.estimate(&data)?;
    let vals = corrected_values(kernel, point.functional.as_ref(), &theta_hat, cfg.k, cfg.m, &key)?;
    Ok(Replicate {
        errors: orders.iter().map(|j| vals.values[*j] - f_theta).collect(),
        aborted_chains: vals.aborted,
    })
}

/// One summary per reported order at grid point `index`.
pub(super) fn measure_point(
    cfg: &ExperimentConfig,
    ctx: &Context,
    index: usize,
    point: &GridPoint,
    orders: &[usize],
) -> Result<Vec<TrialSummary>> {
    let timer = Timer::start(cfg.record_time);
    let f = point.functional.as_ref();
    let model = point.model.as_ref();
    let f_theta = f.value(&point.theta);
    let s_f = sigma_f(model, f, &point.theta)?;
    let truncation = match cfg.chains {
        ChainKind::Hat => None,
        ChainKind::Tilde => cfg
            .delta
            .resolve(model, &point.theta, point.n)?
            .map(|d| TruncationRule::new(d, point.n))
            .transpose()?,
    };
    let base = StreamKey::new(cfg.seed).with_point(index as u64);
    let results = ctx.map_indexed(cfg.r, |r| {
        let key = base.with_replicate(r as u64);
        match cfg.chains {
            ChainKind::Hat => {
                let kernel = BootstrapKernel { model, n: point.n };
                replicate(cfg, point, &kernel, f_theta, orders, key)
            }
            ChainKind::Tilde => {
                let kernel = SurrogateKernel {
                    model,
                    n: point.n,
                    truncation,
                };
                replicate(cfg, point, &kernel, f_theta, orders, key)
            }
        }
    });

    let mut per_order: Vec<Vec<f64>> = vec![Vec::with_capacity(cfg.r); orders.len()];
    let mut aborted_reps = 0usize;
    let mut aborted_chains = 0usize;
    for res in results {
        match res {
            Ok(rep) => {
                aborted_chains += rep.aborted_chains;
                for (errs, e) in per_order.iter_mut().zip(rep.errors) {
                    errs.push(e);
                }
            }
            Err(_) => aborted_reps += 1,
        }
    }
    let failed = aborted_reps as f64 > MAX_ABORT_FRACTION * cfg.r as f64 || aborted_reps + 1 >= cfg.r;
    let seconds = timer.seconds();
    Ok(orders
        .iter()
        .zip(per_order)
        .map(|(&k, errors)| {
            let mut s = summarize(point.n, point.d, k, s_f, &errors);
            s.aborts = aborted_reps + aborted_chains;
            s.seconds = seconds;
            s.failed = failed;
            if cfg.retain_errors {
                s.errors = Some(errors);
            }
            s
        })
        .collect())
}

fn measure_grid(
    cfg: &ExperimentConfig,
    ctx: &Context,
    check: impl Fn(&GridPoint) -> Result<()>,
) -> Result<Vec<TrialSummary>> {
    let mut rows = Vec::new();
    for (index, &n) in cfg.grid.iter().enumerate() {
        let point = ctx.point(cfg, n)?;
        check(&point)?;
        rows.extend(measure_point(cfg, ctx, index, &point, &reported_orders(cfg))?);
    }
    Ok(rows)
}

fn output(cfg: &ExperimentConfig, summaries: Vec<TrialSummary>) -> ExperimentOutput {
    ExperimentOutput {
        kind: cfg.kind.clone(),
        summaries,
        ..Default::default()
    }
}

pub(super) struct Risk;

impl Experiment for Risk {
    fn name(&self) -> &'static str {
        "risk"
    }

    fn run(&self, cfg: &ExperimentConfig, ctx: &Context) -> Result<ExperimentOutput> {
        Ok(output(cfg, measure_grid(cfg, ctx, |_| Ok(()))?))
    }
}

pub(super) struct Normality;

impl Experiment for Normality {
    fn name(&self) -> &'static str {
        "normality"
    }

    fn validate(&self, cfg: &ExperimentConfig) -> Result<()> {
        if cfg.r < MIN_NORMALITY_REPLICATES {
            return Err(Error::config(
                "mc.R",
                format!("normality diagnostics need R >= {MIN_NORMALITY_REPLICATES}"),
            ));
        }
        if !(cfg.sigma0 > 0.0) {
            return Err(Error::config("options.sigma0", "sigma0 must be > 0"));
        }
        Ok(())
    }

    fn run(&self, cfg: &ExperimentConfig, ctx: &Context) -> Result<ExperimentOutput> {
        let rows = measure_grid(cfg, ctx, |p| {
            let s = sigma_f(p.model.as_ref(), p.functional.as_ref(), &p.theta)?;
            if s < cfg.sigma0 {
                return Err(Error::config(
                    "options.sigma0",
                    format!("sigma_f(theta) = {s:e} is below sigma0 = {:e} at n = {}", cfg.sigma0, p.n),
                ));
            }
            Ok(())
        })?;
        Ok(output(cfg, rows))
    }
}

pub(super) struct Sweep;

impl Experiment for Sweep {
    fn name(&self) -> &'static str {
        "sweep"
    }

    fn validate(&self, cfg: &ExperimentConfig) -> Result<()> {
        if cfg.grid.len() < 3 {
            return Err(Error::config("grid.n", "a sweep needs at least 3 sample sizes"));
        }
        Ok(())
    }

    fn run(&self, cfg: &ExperimentConfig, ctx: &Context) -> Result<ExperimentOutput> {
        let rows = measure_grid(cfg, ctx, |_| Ok(()))?;
        let (ns, rmses): (Vec<f64>, Vec<f64>) = rows
            .iter()
            .filter(|s| s.k == cfg.k && !s.failed)
            .map(|s| (s.n as f64, s.rmse))
            .unzip();
        let fit = rate_fit(&ns, &rmses).ok();
        let mut out = output(cfg, rows);
        out.fit = fit;
        Ok(out)
    }
}
