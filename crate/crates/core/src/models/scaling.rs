use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, ParamVector};
use crate::params::ScalarOrVec;

/// Config form of a scaling map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalingSpec {
    Identity,
    Isotropic { sigma: f64 },
    Constant { matrix: Vec<Vec<f64>> },
    Diagonal { a: ScalarOrVec, b: ScalarOrVec },
}

impl Default for ScalingSpec {
    fn default() -> Self {
        ScalingSpec::Identity
    }
}

impl ScalingSpec {
    pub fn resolve(&self, d: usize) -> Result<ScalingMap> {
        let map = match self {
            ScalingSpec::Identity => ScalingMap::Isotropic(1.0),
            ScalingSpec::Isotropic { sigma } => ScalingMap::Isotropic(*sigma),
            ScalingSpec::Constant { matrix } => ScalingMap::Constant(
                Matrix::from_rows(matrix).map_err(|e| Error::config("scaling.matrix", e.to_string()))?,
            ),
            ScalingSpec::Diagonal { a, b } => ScalingMap::Diagonal {
                a: a.resolve(d, "scaling.a")?,
                b: b.resolve(d, "scaling.b")?,
            },
        };
        map.validate(d)?;
        Ok(map)
    }
}

/// The matrix-valued map `theta -> A(theta)`.
#[derive(Clone, Debug, PartialEq)]
pub enum ScalingMap {
    /// `sigma * I`.
    Isotropic(f64),
    Constant(Matrix),
    /// `diag(a_i + b_i tanh(theta_i))`, nonsingular when `a_i > |b_i|`.
    Diagonal { a: Vec<f64>, b: Vec<f64> },
}

impl ScalingMap {
    pub fn validate(&self, d: usize) -> Result<()> {
        match self {
            ScalingMap::Isotropic(s) => {
                if !s.is_finite() || *s < 0.0 {
                    return Err(Error::config("scaling.sigma", "must be finite and >= 0"));
                }
            }
            ScalingMap::Constant(m) => {
                if m.rows() != d || m.cols() != d {
                    return Err(Error::config(
                        "scaling.matrix",
                        format!("expected {d}x{d}, got {}x{}", m.rows(), m.cols()),
                    ));
                }
            }
            ScalingMap::Diagonal { a, b } => {
                if a.len() != d || b.len() != d {
                    return Err(Error::config("scaling", "coefficient length mismatch"));
                }
                if let Some(i) = (0..d).find(|&i| a[i] <= b[i].abs()) {
                    return Err(Error::config(
                        "scaling",
                        format!("need a_i > |b_i| >= 0, violated at coordinate {i}"),
                    ));
                }
            }
        }
        Ok(())
    }

    /// `A(theta) z`.
    pub fn apply(&self, theta: &ParamVector, z: &[f64]) -> Vec<f64> {
        match self {
            ScalingMap::Isotropic(s) => z.iter().map(|x| s * x).collect(),
            ScalingMap::Constant(m) => m.mul_slice(z).expect("validated dimension"),
            ScalingMap::Diagonal { a, b } => z
                .iter()
                .enumerate()
                .map(|(i, x)| (a[i] + b[i] * theta[i].tanh()) * x)
                .collect(),
        }
    }

    pub fn matrix(&self, theta: &ParamVector) -> Matrix {
        let d = theta.dim();
        match self {
            ScalingMap::Isotropic(s) => Matrix::diagonal(&vec![*s; d]),
            ScalingMap::Constant(m) => m.clone(),
            ScalingMap::Diagonal { a, b } => Matrix::diagonal(
                &(0..d)
                    .map(|i| a[i] + b[i] * theta[i].tanh())
                    .collect::<Vec<_>>(),
            ),
        }
    }
}
