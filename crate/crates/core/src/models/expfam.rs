use std::any::Any;

use rand::RngCore;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{check_dim, check_n, Data, Model};
use crate::error::{Error, Result};
use crate::linalg::{CovMatrix, ParamVector};
use crate::params::{ScalarOrVec, VectorRule};
use crate::registry::parse_params;

/// Lower clamp applied to the sample mean by the default MLE fallback.
pub const FALLBACK_EPS: f64 = 1e-6;

/// Largest Poisson total rate `n e^theta` accepted by the sampler.
const MAX_POISSON_RATE: f64 = 1e15;

#[derive(Clone, Debug, PartialEq)]
pub enum ExpFamily {
    /// Independent `Poisson(e^{theta_i})` coordinates; `Psi(theta) = e^theta`.
    PoissonProduct,
    /// Independent `N(sigma_i^2 theta_i, sigma_i^2)` coordinates with known
    /// variances; canonical parameter `mu / sigma^2`, `Psi(theta) = sigma^2 theta`.
    GaussianMean { variance: Vec<f64> },
}

/// Product exponential family in canonical parametrization, estimated by
/// `Psi^{-1}(X_bar)` when `X_bar` lies in `Psi(T)` and by a fallback point
/// otherwise.
///
/// The Gaussian surrogate lives in mean coordinates `Psi(theta)`, where the
/// estimator of `Psi(theta)` is the sample mean and `Sigma(theta) = Psi'(theta)`.
#[derive(Clone, Debug)]
pub struct ExponentialFamily {
    dim: usize,
    family: ExpFamily,
    fallback: Option<ParamVector>,
}

#[derive(Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
enum FamilyTag {
    PoissonProduct,
    GaussianMean,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Params {
    family: FamilyTag,
    #[serde(default)]
    variance: Option<ScalarOrVec>,
    #[serde(default)]
    fallback: Option<VectorRule>,
}

pub(super) fn build(params: &Value, d: usize) -> Result<Box<dyn Model>> {
    let p: Params = parse_params("model", params)?;
    let family = match p.family {
        FamilyTag::PoissonProduct => {
            if p.variance.is_some() {
                return Err(Error::config(
                    "model.variance",
                    "not a parameter of poisson_product",
                ));
            }
            ExpFamily::PoissonProduct
        }
        FamilyTag::GaussianMean => ExpFamily::GaussianMean {
            variance: p
                .variance
                .unwrap_or(ScalarOrVec::Scalar(1.0))
                .resolve(d, "model.variance")?,
        },
    };
    let fallback = p
        .fallback
        .map(|r| r.resolve(d, "model.fallback"))
        .transpose()?;
    Ok(Box::new(ExponentialFamily::new(d, family, fallback)?))
}

impl ExponentialFamily {
    pub fn new(dim: usize, family: ExpFamily, fallback: Option<ParamVector>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Size("dimension must be >= 1".into()));
        }
        if let ExpFamily::GaussianMean { variance } = &family {
            if variance.len() != dim || variance.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                return Err(Error::config(
                    "model.variance",
                    "need one finite positive variance per coordinate",
                ));
            }
        }
        if let Some(f) = &fallback {
            check_dim(dim, f)?;
        }
        Ok(ExponentialFamily {
            dim,
            family,
            fallback,
        })
    }

    pub fn poisson(dim: usize) -> Result<Self> {
        Self::new(dim, ExpFamily::PoissonProduct, None)
    }

    pub fn family(&self) -> &ExpFamily {
        &self.family
    }

    /// Mean map `Psi(theta) = E_theta X`.
    pub fn mean_map(&self, theta: &ParamVector) -> Result<ParamVector> {
        check_dim(self.dim, theta)?;
        let v = match &self.family {
            ExpFamily::PoissonProduct => theta.iter().map(|t| t.exp()).collect(),
            ExpFamily::GaussianMean { variance } => {
                theta.iter().zip(variance).map(|(t, s2)| s2 * t).collect()
            }
        };
        ParamVector::new(v).map_err(|_| Error::Domain("mean map overflow".into()))
    }

    /// Whether `v` lies in the open set `Psi(T)`.
    pub fn in_mean_range(&self, v: &ParamVector) -> bool {
        match self.family {
            ExpFamily::PoissonProduct => v.iter().all(|x| *x > 0.0),
            ExpFamily::GaussianMean { .. } => true,
        }
    }

    /// `Psi^{-1}`, defined on `Psi(T)`.
    pub fn inverse_mean_map(&self, v: &ParamVector) -> Result<ParamVector> {
        check_dim(self.dim, v)?;
        if !self.in_mean_range(v) {
            return Err(Error::Domain("point outside the mean-map range".into()));
        }
        let t = match &self.family {
            ExpFamily::PoissonProduct => v.iter().map(|x| x.ln()).collect(),
            ExpFamily::GaussianMean { variance } => {
                v.iter().zip(variance).map(|(x, s2)| x / s2).collect()
            }
        };
        ParamVector::new(t)
    }

    /// Diagonal of `Psi'(theta)`.
    fn mean_map_derivative(&self, theta: &ParamVector) -> Vec<f64> {
        match &self.family {
            ExpFamily::PoissonProduct => theta.iter().map(|t| t.exp()).collect(),
            ExpFamily::GaussianMean { variance } => variance.clone(),
        }
    }

    /// The fallback point for a sample mean outside `Psi(T)`: the configured
    /// `theta_0`, or `Psi^{-1}(max(X_bar, eps))` coordinatewise.
    pub fn fallback_point(&self, mean: &ParamVector) -> Result<ParamVector> {
        match &self.fallback {
            Some(f) => Ok(f.clone()),
            None => {
                let clamped =
                    ParamVector::new(mean.iter().map(|x| x.max(FALLBACK_EPS)).collect())?;
                self.inverse_mean_map(&clamped)
            }
        }
    }

    /// MLE from a sample mean.
    pub fn mle(&self, mean: &ParamVector) -> Result<ParamVector> {
        if self.in_mean_range(mean) {
            self.inverse_mean_map(mean)
        } else {
            self.fallback_point(mean)
        }
    }
}

impl Model for ExponentialFamily {
    fn name(&self) -> &'static str {
        "exponential_family"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn check_domain(&self, theta: &ParamVector) -> Result<()> {
        check_dim(self.dim, theta)?;
        if let ExpFamily::PoissonProduct = self.family {
            if let Some(t) = theta.iter().find(|t| **t > 700.0) {
                return Err(Error::Domain(format!("Poisson canonical parameter {t} overflows")));
            }
        }
        Ok(())
    }

    fn sample_data(&self, theta: &ParamVector, n: usize, rng: &mut dyn RngCore) -> Result<Data> {
        self.check_domain(theta)?;
        check_n(n)?;
        let nf = n as f64;
        let mean = match &self.family {
            ExpFamily::PoissonProduct => theta
                .iter()
                .map(|t| {
                    let rate = nf * t.exp();
                    if !(rate <= MAX_POISSON_RATE) {
                        return Err(Error::Domain(format!("Poisson rate {rate:e} too large")));
                    }
                    if rate == 0.0 {
                        return Ok(0.0);
                    }
                    let total: f64 = Poisson::new(rate)
                        .map_err(|e| Error::Domain(e.to_string()))?
                        .sample(rng);
                    Ok(total / nf)
                })
                .collect::<Result<Vec<_>>>()?,
            // sum of n draws is N(n sigma^2 theta, n sigma^2)
            ExpFamily::GaussianMean { variance } => theta
                .iter()
                .zip(variance)
                .map(|(t, s2)| {
                    let z: f64 = StandardNormal.sample(rng);
                    s2 * t + (s2 / nf).sqrt() * z
                })
                .collect(),
        };
        Ok(Data::Mean {
            mean: ParamVector::new(mean)?,
            n,
        })
    }

    fn estimate(&self, data: &Data) -> Result<ParamVector> {
        self.mle(data.statistic())
    }

    fn sigma(&self, theta: &ParamVector) -> Result<CovMatrix> {
        self.check_domain(theta)?;
        CovMatrix::diagonal(&self.mean_map_derivative(theta))
    }

    fn sample_xi(&self, theta: &ParamVector, rng: &mut dyn RngCore) -> Result<ParamVector> {
        self.check_domain(theta)?;
        ParamVector::new(
            self.mean_map_derivative(theta)
                .iter()
                .map(|v| {
                    let z: f64 = StandardNormal.sample(rng);
                    v.sqrt() * z
                })
                .collect(),
        )
    }

    fn to_surrogate(&self, theta: &ParamVector) -> Result<ParamVector> {
        self.mean_map(theta)
    }

    fn from_surrogate(&self, point: &ParamVector) -> Result<ParamVector> {
        self.mle(point)
    }

    fn pullback_gradient(&self, theta: &ParamVector, grad: &ParamVector) -> Result<ParamVector> {
        check_dim(self.dim, grad)?;
        let deriv = self.mean_map_derivative(theta);
        ParamVector::new(grad.iter().zip(deriv).map(|(g, d)| g / d).collect())
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}
