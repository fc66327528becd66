//! Declarative Monte Carlo experiments over a grid of sample sizes.
//!
//! Every experiment kind implements [`Experiment`] and is looked up by name
//! in [`registry`]. Replicates run on a dedicated thread pool; results are
//! collected by replicate index and folded sequentially, so summaries do not
//! depend on the number of workers.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{self, Functional, FunctionalBuilder};
use crate::linalg::ParamVector;
use crate::models::{self, Model, ModelBuilder};
use crate::params::VectorRule;
use crate::registry::{ComponentSpec, Registry};

mod clt;
mod fit;
mod oracle;
mod risk;
mod summary;

pub use clt::CltRow;
pub use fit::{loglog_fit, rate_fit, RateFit};
pub use oracle::{oracle_passes, OracleRow};
pub use summary::{summarize, TrialSummary};

/// Default number of draws per grid point in the CLT diagnostic.
pub const DEFAULT_CLT_SAMPLES: usize = 20_000;

/// Smallest replicate count accepted by normality diagnostics.
pub const MIN_NORMALITY_REPLICATES: usize = 100;

/// How the dimension follows the sample size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DimRule {
    Fixed(usize),
    /// `d = ceil(n^alpha)`.
    Alpha(f64),
}

impl DimRule {
    pub fn dim(&self, n: usize) -> usize {
        match *self {
            DimRule::Fixed(d) => d,
            DimRule::Alpha(a) => {
                let x = (n as f64).powf(a);
                let r = x.round();
                // exact powers such as 32^0.4 should not round up
                if (x - r).abs() <= 1e-9 * r.max(1.0) {
                    r as usize
                } else {
                    x.ceil() as usize
                }
            }
        }
    }
}

/// Truncation radius for surrogate chains.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DeltaRule {
    /// `3 sqrt(tr Sigma(theta) / n)`.
    Auto,
    Infinite,
    Value(f64),
}

impl DeltaRule {
    pub fn resolve(&self, model: &dyn Model, theta: &ParamVector, n: usize) -> Result<Option<f64>> {
        match *self {
            DeltaRule::Auto => crate::gaussian::default_delta(model, theta, n).map(Some),
            DeltaRule::Infinite => Ok(None),
            DeltaRule::Value(d) => Ok(Some(d)),
        }
    }
}

/// Which chain drives the inner correction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainKind {
    /// Parametric bootstrap chain.
    Hat,
    /// Truncated Gaussian surrogate chain.
    Tilde,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub kind: String,
    pub model: ComponentSpec,
    pub functional: ComponentSpec,
    pub theta: VectorRule,
    pub k: usize,
    pub grid: Vec<usize>,
    pub dim: DimRule,
    /// Inner chains per corrected value.
    pub m: usize,
    /// Outer replicates per grid point.
    pub r: usize,
    pub delta: DeltaRule,
    pub seed: u64,
    pub chains: ChainKind,
    /// Also report the plug-in (`k = 0`) rows, paired with the corrected ones.
    pub include_plugin: bool,
    /// Lower bound on `sigma_f(theta)` for normality diagnostics.
    pub sigma0: f64,
    /// Projection direction of the CLT diagnostic.
    pub projection: VectorRule,
    pub clt_samples: usize,
    pub retain_errors: bool,
    /// Worker threads; 0 lets the pool choose.
    pub threads: usize,
    /// Record wall time per grid point; when off the column is 0.
    pub record_time: bool,
}

impl ExperimentConfig {
    pub fn new(kind: impl Into<String>, model: ComponentSpec, functional: ComponentSpec) -> Self {
        ExperimentConfig {
            kind: kind.into(),
            model,
            functional,
            theta: VectorRule::default(),
            k: 1,
            grid: vec![100],
            dim: DimRule::Fixed(1),
            m: 1000,
            r: 2000,
            delta: DeltaRule::Auto,
            seed: 0,
            chains: ChainKind::Hat,
            include_plugin: false,
            sigma0: 1e-8,
            projection: VectorRule::default(),
            clt_samples: DEFAULT_CLT_SAMPLES,
            retain_errors: false,
            threads: 0,
            record_time: true,
        }
    }

    /// Checks shared by every experiment kind.
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::config("grid.n", "need at least one sample size"));
        }
        if self.grid.contains(&0) {
            return Err(Error::config("grid.n", "sample sizes must be >= 1"));
        }
        if self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("grid.n", "sample sizes must be strictly increasing"));
        }
        match self.dim {
            DimRule::Fixed(0) => return Err(Error::config("grid.d", "dimension must be >= 1")),
            DimRule::Alpha(a) if !(a > 0.0 && a < 1.0) => {
                return Err(Error::config("grid.alpha", "alpha must lie in (0, 1)"))
            }
            _ => {}
        }
        if self.k > crate::bootstrap::MAX_ORDER {
            return Err(Error::config(
                "k",
                format!("order must be <= {}", crate::bootstrap::MAX_ORDER),
            ));
        }
        if self.k >= 1 && self.m == 0 {
            return Err(Error::config("mc.M", "need M >= 1 when k >= 1"));
        }
        if self.r < 2 {
            return Err(Error::config("mc.R", "need R >= 2"));
        }
        if let DeltaRule::Value(d) = self.delta {
            if !(d > 0.0) {
                return Err(Error::config("delta", "delta must be positive"));
            }
        }
        if !(self.sigma0 >= 0.0) {
            return Err(Error::config("options.sigma0", "sigma0 must be >= 0"));
        }
        Ok(())
    }
}

/// Everything an experiment produces.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ExperimentOutput {
    pub kind: String,
    pub summaries: Vec<TrialSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub clt: Vec<CltRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub oracle: Vec<OracleRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<RateFit>,
}

impl ExperimentOutput {
    /// Whether any grid point or oracle comparison failed.
    pub fn failed(&self) -> bool {
        self.summaries.iter().any(|s| s.failed) || self.oracle.iter().any(|o| !o.pass)
    }
}

/// Shared resources for running experiments.
pub struct Context {
    pub models: Registry<ModelBuilder>,
    pub functionals: Registry<FunctionalBuilder>,
    pool: rayon::ThreadPool,
}

impl Context {
    pub fn new(threads: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
        Ok(Context {
            models: models::registry(),
            functionals: functionals::registry(),
            pool,
        })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }

    /// Evaluate `work(0), ..., work(count - 1)` on the pool, returned in
    /// index order.
    pub fn map_indexed<T, F>(&self, count: usize, work: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool
            .install(|| (0..count).into_par_iter().map(&work).collect())
    }

    /// Model, functional and parameter for one grid point.
    pub fn point(&self, cfg: &ExperimentConfig, n: usize) -> Result<GridPoint> {
        let d = cfg.dim.dim(n);
        let model = models::build(&self.models, &cfg.model, d)?;
        let functional = functionals::build(&self.functionals, &cfg.functional, d)?;
        let theta = cfg.theta.resolve(d, "theta")?;
        model.check_domain(&theta)?;
        Ok(GridPoint {
            n,
            d,
            model,
            functional,
            theta,
        })
    }
}

pub struct GridPoint {
    pub n: usize,
    pub d: usize,
    pub model: Box<dyn Model>,
    pub functional: Box<dyn Functional>,
    pub theta: ParamVector,
}

/// Wall-clock timer that reads 0 when timing is disabled.
pub(crate) struct Timer(Option<Instant>);

impl Timer {
    pub(crate) fn start(enabled: bool) -> Self {
        Timer(enabled.then(Instant::now))
    }

    pub(crate) fn seconds(&self) -> f64 {
        self.0.map_or(0.0, |t| t.elapsed().as_secs_f64())
    }
}

pub trait Experiment: Send + Sync {
    fn name(&self) -> &'static str;

    /// Kind-specific checks on top of [`ExperimentConfig::validate`].
    fn validate(&self, _cfg: &ExperimentConfig) -> Result<()> {
        Ok(())
    }

    fn run(&self, cfg: &ExperimentConfig, ctx: &Context) -> Result<ExperimentOutput>;
}

/// Registry with all built-in experiment kinds.
pub fn registry() -> Registry<Box<dyn Experiment>> {
    let mut r: Registry<Box<dyn Experiment>> = Registry::new("experiment");
    r.register("risk", Box::new(risk::Risk))
        .register("normality", Box::new(risk::Normality))
        .register("sweep", Box::new(risk::Sweep))
        .register("clt", Box::new(clt::Clt))
        .register("oracle-check", Box::new(oracle::OracleCheck));
    r
}

/// Validate and run `cfg` with the built-in registries.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let experiments = registry();
    let exp = experiments.get(&cfg.kind)?;
    cfg.validate()?;
    exp.validate(cfg)?;
    let ctx = Context::new(cfg.threads)?;
    exp.run(cfg, &ctx)
}
