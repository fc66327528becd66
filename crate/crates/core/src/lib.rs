//! Iterated parametric bootstrap bias reduction for smooth functionals of
//! high-dimensional parameters, with Gaussian surrogate chains and the
//! Monte Carlo harness used to study them.

pub mod bootstrap;
pub mod distances;
pub mod error;
pub mod experiments;
pub mod functionals;
pub mod gaussian;
pub mod linalg;
pub mod models;
pub mod params;
pub mod pauli;
pub mod registry;
pub mod rng;

pub use error::{Error, Result};
pub use functionals::Functional;
pub use linalg::{CovMatrix, Matrix, ParamVector};
pub use models::{Data, Model};
pub use rng::StreamKey;
