//! Statistical families `P_theta^(n)`, their estimators, and Gaussian
//! surrogates `xi(theta)` with covariance `Sigma(theta)`.
//!
//! Each family implements [`Model`]; [`registry`] maps config names to
//! builders so experiment code never matches on concrete types.

use std::any::Any;
use std::fmt;

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg::{CovMatrix, ParamVector};
use crate::registry::{ComponentSpec, Registry};

mod expfam;
mod gaussian_shift;
mod independent;
mod location;
mod noise;
mod scaling;

pub use expfam::{ExpFamily, ExponentialFamily};
pub use gaussian_shift::GaussianShift;
pub use independent::IndependentComponents;
pub use location::{LocationNoise, LocationNoiseKind, LogConcaveLocation};
pub use noise::NoiseDist;
pub use scaling::{ScalingMap, ScalingSpec};

/// Observed data, reduced to what the estimators need.
///
/// The i.i.d. models keep only the sample mean and sample size; see
/// [`IndependentComponents::sample_observation`] and friends for single
/// draws.
#[derive(Clone, Debug, PartialEq)]
pub enum Data {
    /// One observation `X = theta + A(theta) z / sqrt(n)`.
    Single(ParamVector),
    /// Sample mean of `n` i.i.d. observations.
    Mean { mean: ParamVector, n: usize },
}

impl Data {
    pub fn statistic(&self) -> &ParamVector {
        match self {
            Data::Single(x) => x,
            Data::Mean { mean, .. } => mean,
        }
    }
}

/// A statistical model with a Gaussian surrogate.
///
/// The surrogate acts in the model's *surrogate coordinates*, in which the
/// estimator is approximately `point + xi(theta) / sqrt(n)`. These coincide
/// with the parameter for every model except the exponential family, whose
/// surrogate lives in mean coordinates `Psi(theta)`.
pub trait Model: Send + Sync + fmt::Debug + Any {
    fn name(&self) -> &'static str;

    fn dim(&self) -> usize;

    /// Reject parameters outside the model's domain.
    fn check_domain(&self, theta: &ParamVector) -> Result<()> {
        check_dim(self.dim(), theta)
    }

    fn sample_data(&self, theta: &ParamVector, n: usize, rng: &mut dyn RngCore) -> Result<Data>;

    fn estimate(&self, data: &Data) -> Result<ParamVector>;

    /// Exact covariance of `xi(theta)`.
    fn sigma(&self, theta: &ParamVector) -> Result<CovMatrix>;

    /// One draw of `xi(theta)`. The default goes through `Sigma^{1/2}`;
    /// models with a cheap factorization override it.
    fn sample_xi(&self, theta: &ParamVector, rng: &mut dyn RngCore) -> Result<ParamVector> {
        let root = self.sigma(theta)?.sqrt()?;
        let z = standard_normals(self.dim(), rng);
        ParamVector::new(root.mul_slice(&z)?)
    }

    fn to_surrogate(&self, theta: &ParamVector) -> Result<ParamVector> {
        Ok(theta.clone())
    }

    fn from_surrogate(&self, point: &ParamVector) -> Result<ParamVector> {
        Ok(point.clone())
    }

    /// Gradient of `f o (surrogate chart)^{-1}` given the gradient of `f` at
    /// `theta`.
    fn pullback_gradient(&self, _theta: &ParamVector, grad: &ParamVector) -> Result<ParamVector> {
        Ok(grad.clone())
    }

    fn as_any(&self) -> &dyn Any;

    /// One draw from the Markov kernel `P(theta; .)`: simulate data, refit.
    fn draw_estimate(
        &self,
        theta: &ParamVector,
        n: usize,
        rng: &mut dyn RngCore,
    ) -> Result<ParamVector> {
        let data = self.sample_data(theta, n, rng)?;
        self.estimate(&data)
    }
}

pub(crate) fn check_dim(d: usize, theta: &ParamVector) -> Result<()> {
    if theta.dim() != d {
        Err(Error::Dimension {
            expected: d,
            got: theta.dim(),
        })
    } else {
        Ok(())
    }
}

pub(crate) fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::Size("sample size n must be >= 1".into()))
    } else {
        Ok(())
    }
}

pub(crate) fn standard_normals(d: usize, rng: &mut dyn RngCore) -> Vec<f64> {
    (0..d).map(|_| StandardNormal.sample(rng)).collect()
}

/// Builds a model of dimension `d` from its config parameters.
pub type ModelBuilder = fn(&Value, usize) -> Result<Box<dyn Model>>;

/// Registry with all built-in models.
pub fn registry() -> Registry<ModelBuilder> {
    let mut r: Registry<ModelBuilder> = Registry::new("model");
    r.register("gaussian_shift", gaussian_shift::build)
        .register("independent_components", independent::build)
        .register("exponential_family", expfam::build)
        .register("log_concave_location", location::build);
    r
}

pub fn build(registry: &Registry<ModelBuilder>, spec: &ComponentSpec, d: usize) -> Result<Box<dyn Model>> {
    if d == 0 {
        return Err(Error::config("model", "dimension must be >= 1"));
    }
    let builder = registry.get(&spec.kind)?;
    builder(&spec.params, d)
}
