use std::any::Any;

use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{check_dim, check_n, standard_normals, Data, Model};
use crate::error::{Error, Result};
use crate::linalg::{CovMatrix, ParamVector};
use crate::params::ScalarOrVec;
use crate::registry::parse_params;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocationNoiseKind {
    Laplace,
    Logistic,
    Gaussian,
}

/// Mean-zero log-concave scalar noise with a scale parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocationNoise {
    pub kind: LocationNoiseKind,
    pub scale: f64,
}

impl LocationNoise {
    pub fn new(kind: LocationNoiseKind, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::config("model.scale", "scale must be finite and > 0"));
        }
        Ok(LocationNoise { kind, scale })
    }

    pub fn variance(&self) -> f64 {
        let b = self.scale;
        match self.kind {
            LocationNoiseKind::Laplace => 2.0 * b * b,
            LocationNoiseKind::Logistic => std::f64::consts::PI.powi(2) * b * b / 3.0,
            LocationNoiseKind::Gaussian => b * b,
        }
    }

    /// Poincare constant (or an upper bound on it). Informational only.
    ///
    /// Gaussian: `sigma^2`. Laplace: `4 b^2`. Logistic: the general
    /// log-concave bound `12 Var`.
    pub fn poincare_constant(&self) -> f64 {
        match self.kind {
            LocationNoiseKind::Gaussian => self.scale * self.scale,
            LocationNoiseKind::Laplace => 4.0 * self.scale * self.scale,
            LocationNoiseKind::Logistic => 12.0 * self.variance(),
        }
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        match self.kind {
            LocationNoiseKind::Gaussian => {
                let z: f64 = StandardNormal.sample(rng);
                self.scale * z
            }
            LocationNoiseKind::Laplace => {
                let u: f64 = rng.random_range(-0.5..0.5);
                -self.scale * u.signum() * (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE).ln()
            }
            LocationNoiseKind::Logistic => {
                let u: f64 = rng.random();
                // u in [0, 1); 0 maps to -inf, so nudge into the open interval
                let u = u.max(f64::MIN_POSITIVE);
                self.scale * (u / (1.0 - u)).ln()
            }
        }
    }

    fn sample_mean(&self, n: usize, rng: &mut dyn RngCore) -> f64 {
        match self.kind {
            LocationNoiseKind::Gaussian => {
                let z: f64 = StandardNormal.sample(rng);
                self.scale * z / (n as f64).sqrt()
            }
            _ => (0..n).map(|_| self.sample(rng)).sum::<f64>() / n as f64,
        }
    }
}

/// `X = theta + eta` with independent log-concave coordinates; the
/// estimator is the sample mean.
#[derive(Clone, Debug)]
pub struct LogConcaveLocation {
    noise: Vec<LocationNoise>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NoiseParam {
    One(LocationNoiseKind),
    PerCoordinate(Vec<LocationNoiseKind>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Params {
    noise: NoiseParam,
    #[serde(default = "unit_scale")]
    scale: ScalarOrVec,
}

fn unit_scale() -> ScalarOrVec {
    ScalarOrVec::Scalar(1.0)
}

pub(super) fn build(params: &Value, d: usize) -> Result<Box<dyn Model>> {
    let p: Params = parse_params("model", params)?;
    let kinds = match p.noise {
        NoiseParam::One(k) => vec![k; d],
        NoiseParam::PerCoordinate(v) if v.len() == d => v,
        NoiseParam::PerCoordinate(v) => {
            return Err(Error::config(
                "model.noise",
                format!("expected {d} noise tags, got {}", v.len()),
            ))
        }
    };
    let scales = p.scale.resolve(d, "model.scale")?;
    let noise = kinds
        .into_iter()
        .zip(scales)
        .map(|(k, s)| LocationNoise::new(k, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(Box::new(LogConcaveLocation::new(noise)?))
}

impl LogConcaveLocation {
    pub fn new(noise: Vec<LocationNoise>) -> Result<Self> {
        if noise.is_empty() {
            return Err(Error::Size("dimension must be >= 1".into()));
        }
        Ok(LogConcaveLocation { noise })
    }

    pub fn noise(&self) -> &[LocationNoise] {
        &self.noise
    }

    pub fn sample_observation(&self, theta: &ParamVector, rng: &mut dyn RngCore) -> Result<ParamVector> {
        check_dim(self.dim(), theta)?;
        ParamVector::new(
            theta
                .iter()
                .zip(&self.noise)
                .map(|(t, e)| t + e.sample(rng))
                .collect(),
        )
    }
}

impl Model for LogConcaveLocation {
    fn name(&self) -> &'static str {
        "log_concave_location"
    }

    fn dim(&self) -> usize {
        self.noise.len()
    }

    fn sample_data(&self, theta: &ParamVector, n: usize, rng: &mut dyn RngCore) -> Result<Data> {
        check_dim(self.dim(), theta)?;
        check_n(n)?;
        let mean = theta
            .iter()
            .zip(&self.noise)
            .map(|(t, e)| t + e.sample_mean(n, rng))
            .collect();
        Ok(Data::Mean {
            mean: ParamVector::new(mean)?,
            n,
        })
    }

    fn estimate(&self, data: &Data) -> Result<ParamVector> {
        Ok(data.statistic().clone())
    }

    fn sigma(&self, theta: &ParamVector) -> Result<CovMatrix> {
        check_dim(self.dim(), theta)?;
        CovMatrix::diagonal(&self.noise.iter().map(|e| e.variance()).collect::<Vec<_>>())
    }

    fn sample_xi(&self, theta: &ParamVector, rng: &mut dyn RngCore) -> Result<ParamVector> {
        check_dim(self.dim(), theta)?;
        let z = standard_normals(self.dim(), rng);
        ParamVector::new(
            z.iter()
                .zip(&self.noise)
                .map(|(z, e)| z * e.variance().sqrt())
                .collect(),
        )
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}
