use std::any::Any;

use rand::RngCore;
use serde::Deserialize;
use serde_json::Value;

use super::{check_dim, check_n, standard_normals, Data, Model, NoiseDist, ScalingMap, ScalingSpec};
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, CovMatrix, Matrix, ParamVector};
use crate::registry::parse_params;

/// `X = theta + A(theta) sum_j eta_j x_j` with independent standardized
/// `eta_j`. The estimator is the sample mean of `n` copies.
///
/// With `x_j` the standard basis of `R^{m^2}` this is the Pauli-basis
/// matrix model written in Pauli coefficients.
#[derive(Clone, Debug)]
pub struct IndependentComponents {
    dim: usize,
    /// Columns are the directions `x_j`.
    directions: Matrix,
    noise: Vec<NoiseDist>,
    scaling: ScalingMap,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DirectionsParam {
    Named(String),
    Explicit(Vec<Vec<f64>>),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NoiseParam {
    One(NoiseDist),
    PerCoordinate(Vec<NoiseDist>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Params {
    #[serde(default)]
    directions: Option<DirectionsParam>,
    noise: NoiseParam,
    #[serde(default)]
    scaling: ScalingSpec,
}

pub(super) fn build(params: &Value, d: usize) -> Result<Box<dyn Model>> {
    let p: Params = parse_params("model", params)?;
    let directions = match p.directions {
        None => standard_directions(d),
        Some(DirectionsParam::Named(s)) if s == "standard" => standard_directions(d),
        Some(DirectionsParam::Named(s)) => {
            return Err(Error::config(
                "model.directions",
                format!("unknown directions `{s}` (use \"standard\" or a list of vectors)"),
            ))
        }
        Some(DirectionsParam::Explicit(rows)) => rows
            .into_iter()
            .map(ParamVector::new)
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::config("model.directions", e.to_string()))?,
    };
    let noise = match p.noise {
        NoiseParam::One(n) => vec![n; directions.len()],
        NoiseParam::PerCoordinate(v) => v,
    };
    let scaling = p.scaling.resolve(d)?;
    Ok(Box::new(IndependentComponents::new(d, &directions, noise, scaling)?))
}

fn standard_directions(d: usize) -> Vec<ParamVector> {
    (0..d).map(|i| ParamVector::basis(d, i)).collect()
}

impl IndependentComponents {
    pub fn new(
        dim: usize,
        directions: &[ParamVector],
        noise: Vec<NoiseDist>,
        scaling: ScalingMap,
    ) -> Result<Self> {
        if directions.is_empty() {
            return Err(Error::config("model.directions", "need at least one direction"));
        }
        if noise.len() != directions.len() {
            return Err(Error::config(
                "model.noise",
                format!(
                    "{} noise tags for {} directions",
                    noise.len(),
                    directions.len()
                ),
            ));
        }
        if let Some(bad) = directions.iter().find(|x| x.dim() != dim) {
            return Err(Error::Dimension {
                expected: dim,
                got: bad.dim(),
            });
        }
        scaling.validate(dim)?;
        let directions = Matrix::from_columns(directions)?;
        if directions.cols() == dim {
            let gram = directions.transpose().matmul(&directions)?;
            let (vals, _) = symmetric_eigen(&gram)?;
            let max = vals.iter().cloned().fold(0.0, f64::max);
            let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            if min <= 1e-10 * max {
                return Err(Error::config(
                    "model.directions",
                    "directions are linearly dependent",
                ));
            }
        }
        Ok(IndependentComponents {
            dim,
            directions,
            noise,
            scaling,
        })
    }

    pub fn noise(&self) -> &[NoiseDist] {
        &self.noise
    }

    /// One draw of the standardized noise vector `(eta_1, ..., eta_J)`.
    pub fn sample_noise(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        self.noise.iter().map(|n| n.sample(rng)).collect()
    }

    /// One raw observation `X`.
    pub fn sample_observation(&self, theta: &ParamVector, rng: &mut dyn RngCore) -> Result<ParamVector> {
        check_dim(self.dim, theta)?;
        let eta = self.sample_noise(rng);
        self.shift(theta, &eta)
    }

    fn shift(&self, theta: &ParamVector, eta: &[f64]) -> Result<ParamVector> {
        let combo = self.directions.mul_slice(eta)?;
        let noise = self.scaling.apply(theta, &combo);
        ParamVector::new(
            theta
                .iter()
                .zip(noise)
                .map(|(t, e)| t + e)
                .collect(),
        )
    }
}

impl Model for IndependentComponents {
    fn name(&self) -> &'static str {
        "independent_components"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn sample_data(&self, theta: &ParamVector, n: usize, rng: &mut dyn RngCore) -> Result<Data> {
        check_dim(self.dim, theta)?;
        check_n(n)?;
        let eta_bar: Vec<f64> = self.noise.iter().map(|d| d.sample_mean(n, rng)).collect();
        Ok(Data::Mean {
            mean: self.shift(theta, &eta_bar)?,
            n,
        })
    }

    fn estimate(&self, data: &Data) -> Result<ParamVector> {
        Ok(data.statistic().clone())
    }

    fn sigma(&self, theta: &ParamVector) -> Result<CovMatrix> {
        check_dim(self.dim, theta)?;
        // sum_j (A x_j)(A x_j)^T with A x_j the columns of A X
        let ax = self.scaling.matrix(theta).matmul(&self.directions)?;
        CovMatrix::new(ax.matmul(&ax.transpose())?)
    }

    fn sample_xi(&self, theta: &ParamVector, rng: &mut dyn RngCore) -> Result<ParamVector> {
        check_dim(self.dim, theta)?;
        let z = standard_normals(self.directions.cols(), rng);
        let combo = self.directions.mul_slice(&z)?;
        ParamVector::new(self.scaling.apply(theta, &combo))
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}
