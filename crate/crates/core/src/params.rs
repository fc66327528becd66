//! Dimension-generic parameter rules used by configs.
//!
//! Sweeps change `d` from grid point to grid point, so vectors in a config
//! are usually rules ("unit vector along e1", "sin profile") that are
//! resolved once the dimension is known.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ParamVector;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VectorRule {
    Explicit(Vec<f64>),
    Named(String),
    Constant { constant: f64 },
}

impl Default for VectorRule {
    fn default() -> Self {
        VectorRule::Named("sin_unit".into())
    }
}

impl VectorRule {
    pub fn named(name: &str) -> Self {
        VectorRule::Named(name.into())
    }

    /// Resolve to a concrete vector of length `d`.
    ///
    /// Named rules: `zero`, `ones`, `ones_unit` (ones scaled to unit norm),
    /// `e1`, and `sin_unit` (`sin(i)`, `i = 1..=d`, scaled to unit norm).
    pub fn resolve(&self, d: usize, field: &str) -> Result<ParamVector> {
        if d == 0 {
            return Err(Error::config(field, "dimension must be >= 1"));
        }
        let v = match self {
            VectorRule::Explicit(v) => {
                if v.len() != d {
                    return Err(Error::config(
                        field,
                        format!("explicit vector has length {}, dimension is {d}", v.len()),
                    ));
                }
                v.clone()
            }
            VectorRule::Constant { constant } => vec![*constant; d],
            VectorRule::Named(name) => match name.as_str() {
                "zero" => vec![0.0; d],
                "ones" => vec![1.0; d],
                "ones_unit" => vec![1.0 / (d as f64).sqrt(); d],
                "e1" => {
                    let mut v = vec![0.0; d];
                    v[0] = 1.0;
                    v
                }
                "sin_unit" => {
                    let raw: Vec<f64> = (1..=d).map(|i| (i as f64).sin()).collect();
                    let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
                    raw.iter().map(|x| x / norm).collect()
                }
                other => {
                    return Err(Error::config(
                        field,
                        format!(
                            "unknown vector rule `{other}` (zero, ones, ones_unit, e1, sin_unit)"
                        ),
                    ))
                }
            },
        };
        ParamVector::new(v).map_err(|e| Error::config(field, e.to_string()))
    }

    pub fn explicit_len(&self) -> Option<usize> {
        match self {
            VectorRule::Explicit(v) => Some(v.len()),
            _ => None,
        }
    }
}

/// A coefficient given either once for all coordinates or per coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarOrVec {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl ScalarOrVec {
    pub fn resolve(&self, d: usize, field: &str) -> Result<Vec<f64>> {
        let v = match self {
            ScalarOrVec::Scalar(x) => vec![*x; d],
            ScalarOrVec::Vector(v) if v.len() == d => v.clone(),
            ScalarOrVec::Vector(v) => {
                return Err(Error::config(
                    field,
                    format!("expected {d} values, got {}", v.len()),
                ))
            }
        };
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::config(field, "values must be finite"));
        }
        Ok(v)
    }
}
