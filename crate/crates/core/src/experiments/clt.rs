//! Projected CLT diagnostic: how close `<u, sqrt(n)(theta_hat - theta)>` is
//! to its Gaussian surrogate `<u, xi(theta)>`.

use serde::Serialize;

use super::{Context, Experiment, ExperimentConfig, ExperimentOutput, Timer};
use crate::distances::{wasserstein1, wasserstein2, SampleVec};
use crate::error::{Error, Result};
use crate::rng::{StreamKey, DATA_STREAM};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CltRow {
    pub n: usize,
    pub d: usize,
    pub samples: usize,
    pub w1: f64,
    pub w2: f64,
    /// Monte Carlo mean of `||xi(theta)||^2` and its standard error.
    pub xi_sq_mean: f64,
    pub xi_sq_se: f64,
    pub trace_sigma: f64,
    pub seconds: f64,
}

pub(super) struct Clt;

const XI_STREAM: u64 = 1;

impl Experiment for Clt {
    fn name(&self) -> &'static str {
        "clt"
    }

    fn validate(&self, cfg: &ExperimentConfig) -> Result<()> {
        if cfg.clt_samples < 2 {
            return Err(Error::config("options.clt_samples", "need at least 2 samples"));
        }
        Ok(())
    }

    fn run(&self, cfg: &ExperimentConfig, ctx: &Context) -> Result<ExperimentOutput> {
        let mut rows = Vec::with_capacity(cfg.grid.len());
        for (index, &n) in cfg.grid.iter().enumerate() {
            let timer = Timer::start(cfg.record_time);
            let point = ctx.point(cfg, n)?;
            let model = point.model.as_ref();
            let u = cfg.projection.resolve(point.d, "options.projection")?;
            let origin = model.to_surrogate(&point.theta)?;
            let root_n = (n as f64).sqrt();
            let base = StreamKey::new(cfg.seed).with_point(index as u64);
            let draws = ctx.map_indexed(cfg.clt_samples, |i| -> Result<(f64, f64, f64)> {
                let key = base.with_replicate(i as u64);
                let est = model.draw_estimate(&point.theta, n, &mut key.stream(DATA_STREAM))?;
                let diff = model.to_surrogate(&est)?.add_scaled(-1.0, &origin)?;
                let xi = model.sample_xi(&point.theta, &mut key.stream(XI_STREAM))?;
                Ok((root_n * u.dot(&diff), u.dot(&xi), xi.norm_sq()))
            });
            let draws = draws.into_iter().collect::<Result<Vec<_>>>()?;
            let xs = SampleVec::new(draws.iter().map(|t| t.0).collect())?;
            let ys = SampleVec::new(draws.iter().map(|t| t.1).collect())?;
            let sq: Vec<f64> = draws.iter().map(|t| t.2).collect();
            let (xi_sq_mean, xi_sq_se) = crate::bootstrap::mean_and_se(&sq);
            rows.push(CltRow {
                n,
                d: point.d,
                samples: cfg.clt_samples,
                w1: wasserstein1(&xs, &ys)?,
                w2: wasserstein2(&xs, &ys)?,
                xi_sq_mean,
                xi_sq_se,
                trace_sigma: model.sigma(&point.theta)?.trace(),
                seconds: timer.seconds(),
            });
        }
        Ok(ExperimentOutput {
            kind: cfg.kind.clone(),
            clt: rows,
            ..Default::default()
        })
    }
}
