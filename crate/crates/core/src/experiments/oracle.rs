//! Measured bias of `f_k` against the closed form for `exp(<u, theta>)`
//! under the isotropic Gaussian shift model.

use serde::Serialize;

use super::risk::measure_point;
use super::{Context, Experiment, ExperimentConfig, ExperimentOutput};
use crate::bootstrap::bias_oracle_exp;
use crate::error::{Error, Result};
use crate::functionals::ExpLinear;
use crate::models::GaussianShift;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleRow {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub bias: f64,
    pub se_bias: f64,
    /// Signed exact bias `(-1)^k B^{k+1} f(theta)`.
    pub oracle: f64,
    pub pass: bool,
}

/// `|bias - oracle| <= 4 SE`; for `k >= 1`, where the target is usually far
/// below the Monte Carlo resolution, `|bias| <= max(4 SE, 2 |oracle|)` also
/// passes.
pub fn oracle_passes(bias: f64, se: f64, oracle: f64, k: usize) -> bool {
    (bias - oracle).abs() <= 4.0 * se
        || (k >= 1 && bias.abs() <= (4.0 * se).max(2.0 * oracle.abs()))
}

pub(super) struct OracleCheck;

impl Experiment for OracleCheck {
    fn name(&self) -> &'static str {
        "oracle-check"
    }

    fn validate(&self, cfg: &ExperimentConfig) -> Result<()> {
        if cfg.model.kind != "gaussian_shift" {
            return Err(Error::config("model", "oracle-check needs the gaussian_shift model"));
        }
        if cfg.functional.kind != "exp_linear" {
            return Err(Error::config("functional", "oracle-check needs the exp_linear functional"));
        }
        Ok(())
    }

    fn run(&self, cfg: &ExperimentConfig, ctx: &Context) -> Result<ExperimentOutput> {
        let orders: Vec<usize> = (0..=cfg.k).collect();
        let mut summaries = Vec::new();
        let mut oracle = Vec::new();
        for (index, &n) in cfg.grid.iter().enumerate() {
            let point = ctx.point(cfg, n)?;
            let sigma = point
                .model
                .as_any()
                .downcast_ref::<GaussianShift>()
                .and_then(GaussianShift::isotropic_sigma)
                .ok_or_else(|| {
                    Error::config("model.scaling", "oracle-check needs isotropic scaling")
                })?;
            let u = &point
                .functional
                .as_any()
                .downcast_ref::<ExpLinear>()
                .ok_or_else(|| Error::config("functional", "expected exp_linear"))?
                .u;
            let rows = measure_point(cfg, ctx, index, &point, &orders)?;
            for s in &rows {
                let sign = if s.k % 2 == 0 { 1.0 } else { -1.0 };
                let target = sign * bias_oracle_exp(&point.theta, u, sigma * sigma, n, s.k);
                oracle.push(OracleRow {
                    n,
                    d: point.d,
                    k: s.k,
                    bias: s.bias,
                    se_bias: s.se_bias,
                    oracle: target,
                    pass: !s.failed && oracle_passes(s.bias, s.se_bias, target, s.k),
                });
            }
            summaries.extend(rows);
        }
        Ok(ExperimentOutput {
            kind: cfg.kind.clone(),
            summaries,
            oracle,
            ..Default::default()
        })
    }
}
