use std::any::Any;

use rand::RngCore;
use serde::Deserialize;
use serde_json::Value;

use super::{check_dim, check_n, standard_normals, Data, Model, ScalingMap, ScalingSpec};
use crate::error::{Error, Result};
use crate::linalg::{CovMatrix, ParamVector};
use crate::registry::parse_params;

/// `X = theta + A(theta) z / sqrt(n)` with `z ~ N(0, I)`; the estimator is `X`.
#[derive(Clone, Debug)]
pub struct GaussianShift {
    dim: usize,
    scaling: ScalingMap,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Params {
    #[serde(default)]
    scaling: ScalingSpec,
}

pub(super) fn build(params: &Value, d: usize) -> Result<Box<dyn Model>> {
    let p: Params = parse_params("model", params)?;
    Ok(Box::new(GaussianShift::new(d, p.scaling.resolve(d)?)?))
}

impl GaussianShift {
    pub fn new(dim: usize, scaling: ScalingMap) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Size("dimension must be >= 1".into()));
        }
        scaling.validate(dim)?;
        Ok(GaussianShift { dim, scaling })
    }

    pub fn isotropic(dim: usize, sigma: f64) -> Result<Self> {
        Self::new(dim, ScalingMap::Isotropic(sigma))
    }

    pub fn scaling(&self) -> &ScalingMap {
        &self.scaling
    }

    /// Noise level when the scaling is `sigma * I`.
    pub fn isotropic_sigma(&self) -> Option<f64> {
        match self.scaling {
            ScalingMap::Isotropic(s) => Some(s),
            _ => None,
        }
    }
}

impl Model for GaussianShift {
    fn name(&self) -> &'static str {
        "gaussian_shift"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn sample_data(&self, theta: &ParamVector, n: usize, rng: &mut dyn RngCore) -> Result<Data> {
        check_dim(self.dim, theta)?;
        check_n(n)?;
        let xi = self.sample_xi(theta, rng)?;
        Ok(Data::Single(theta.add_scaled(1.0 / (n as f64).sqrt(), &xi)?))
    }

    fn estimate(&self, data: &Data) -> Result<ParamVector> {
        match data {
            Data::Single(x) => Ok(x.clone()),
            Data::Mean { .. } => Err(Error::Estimation(
                "gaussian_shift expects a single observation".into(),
            )),
        }
    }

    fn sigma(&self, theta: &ParamVector) -> Result<CovMatrix> {
        check_dim(self.dim, theta)?;
        let a = self.scaling.matrix(theta);
        CovMatrix::new(a.matmul(&a.transpose())?)
    }

    fn sample_xi(&self, theta: &ParamVector, rng: &mut dyn RngCore) -> Result<ParamVector> {
        check_dim(self.dim, theta)?;
        let z = standard_normals(self.dim, rng);
        ParamVector::new(self.scaling.apply(theta, &z))
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}
