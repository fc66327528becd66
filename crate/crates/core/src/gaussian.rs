//! Gaussian surrogate chains.
//!
//! The surrogate "estimator" is `theta + xi(theta)/sqrt(n)`, optionally with
//! the draw zeroed once `||xi|| >= delta sqrt(n)`. Its bootstrap chain is a
//! composition of independent steps `G_j(theta) = theta + xi_j(theta)/sqrt(n)`;
//! the random homotopy `H(theta; t) = theta + t xi(theta)/sqrt(n)` evaluated at
//! binary times reproduces the chain marginals.

use rand::RngCore;

use crate::bootstrap::{corrected_value, run_chain, ChainPath, Kernel};
use crate::error::{Error, Result};
use crate::functionals::Functional;
use crate::linalg::ParamVector;
use crate::models::Model;
use crate::rng::StreamKey;

/// Zero a surrogate draw when `||xi|| >= delta sqrt(n)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationRule {
    pub delta: f64,
    pub n: usize,
}

impl TruncationRule {
    /// `delta` may be `+inf` (never truncate).
    pub fn new(delta: f64, n: usize) -> Result<Self> {
        if !(delta > 0.0) || n == 0 {
            return Err(Error::config("delta", "need delta > 0 and n >= 1"));
        }
        Ok(TruncationRule { delta, n })
    }

    pub fn threshold(&self) -> f64 {
        self.delta * (self.n as f64).sqrt()
    }

    pub fn keeps(&self, xi: &ParamVector) -> bool {
        xi.norm() < self.threshold()
    }
}

/// Default radius `3 sqrt(tr Sigma(theta) / n)`, at which truncation
/// essentially never fires.
pub fn default_delta(model: &dyn Model, theta: &ParamVector, n: usize) -> Result<f64> {
    let tr = model.sigma(theta)?.trace();
    Ok(3.0 * (tr / n as f64).sqrt())
}

/// The surrogate transition `theta -> theta + xi_delta(theta)/sqrt(n)` in
/// the model's surrogate coordinates.
pub struct SurrogateKernel<'a> {
    pub model: &'a dyn Model,
    pub n: usize,
    pub truncation: Option<TruncationRule>,
}

impl SurrogateKernel<'_> {
    fn displaced(&self, state: &ParamVector, xi: &ParamVector) -> Result<ParamVector> {
        let point = self.model.to_surrogate(state)?;
        let moved = point.add_scaled(1.0 / (self.n as f64).sqrt(), xi)?;
        self.model.from_surrogate(&moved)
    }
}

impl Kernel for SurrogateKernel<'_> {
    fn step(&self, state: &ParamVector, rng: &mut dyn RngCore) -> Result<ParamVector> {
        let xi = self.model.sample_xi(state, rng)?;
        match &self.truncation {
            Some(t) if !t.keeps(&xi) => Ok(state.clone()),
            _ => self.displaced(state, &xi),
        }
    }
}

pub fn simulate_tilde_chain(
    model: &dyn Model,
    theta: &ParamVector,
    k: usize,
    n: usize,
    truncation: Option<TruncationRule>,
    rng: &mut dyn RngCore,
) -> Result<ChainPath> {
    model.check_domain(theta)?;
    let kernel = SurrogateKernel {
        model,
        n,
        truncation,
    };
    run_chain(&kernel, theta, k, rng)
}

/// Limiting standard deviation `<Sigma(theta) f'(theta), f'(theta)>^{1/2}`,
/// with `f'` taken in surrogate coordinates.
pub fn sigma_f(model: &dyn Model, f: &dyn Functional, theta: &ParamVector) -> Result<f64> {
    let g = model.pullback_gradient(theta, &f.grad(theta))?;
    let q = model.sigma(theta)?.quad_form(&g)?;
    if q < -1e-14 {
        return Err(Error::Numerical(format!("negative variance {q:e}")));
    }
    Ok(q.max(0.0).sqrt())
}

/// Binary times `(t_1, ..., t_k)` for a homotopy superposition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomotopyFlags(pub Vec<bool>);

impl HomotopyFlags {
    pub fn ones(&self) -> usize {
        self.0.iter().filter(|t| **t).count()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// All `2^k` flag vectors in binary counting order, first flag as the
    /// least significant bit.
    pub fn all(k: usize) -> Vec<HomotopyFlags> {
        (0..1usize << k)
            .map(|bits| HomotopyFlags((0..k).map(|i| bits >> i & 1 == 1).collect()))
            .collect()
    }
}

/// `G_k(theta; t_1, ..., t_k)` for the surrogate homotopy. Every step draws
/// its `xi_j`; steps with `t_j = 0` leave the point unchanged.
pub fn superposition_eval(
    model: &dyn Model,
    theta: &ParamVector,
    flags: &HomotopyFlags,
    n: usize,
    rng: &mut dyn RngCore,
) -> Result<ParamVector> {
    model.check_domain(theta)?;
    let kernel = SurrogateKernel {
        model,
        n,
        truncation: None,
    };
    let mut state = theta.clone();
    for &t in &flags.0 {
        let xi = model.sample_xi(&state, rng)?;
        if t {
            state = kernel.displaced(&state, &xi)?;
        }
    }
    Ok(state)
}

/// `f_k` evaluated along truncated surrogate chains. `delta = None` means no
/// truncation.
#[allow(clippy::too_many_arguments)]
pub fn tilde_fk_estimate(
    model: &dyn Model,
    f: &dyn Functional,
    theta_hat: &ParamVector,
    k: usize,
    n: usize,
    delta: Option<f64>,
    m: usize,
    key: &StreamKey,
) -> Result<f64> {
    let truncation = delta.map(|d| TruncationRule::new(d, n)).transpose()?;
    let kernel = SurrogateKernel {
        model,
        n,
        truncation,
    };
    corrected_value(&kernel, f, theta_hat, k, m, key)
}

#[cfg(test)]
mod tests;
