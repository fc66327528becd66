//! Bootstrap Markov chains and the iterated-bootstrap bias correction.
//!
//! With `T g(theta) = E_theta g(theta_hat)` and `B = T - I`, the corrected
//! functional is the Neumann partial sum
//!
//! ```text
//! f_k = sum_{j=0}^{k} (-1)^j B^j f,
//! B^j f(theta) = E sum_{i=0}^{j} (-1)^{j-i} C(j, i) f(theta^(i)),
//! ```
//!
//! where `theta^(0) = theta, theta^(1), ...` is the bootstrap chain obtained
//! by repeatedly refitting the estimator to data simulated at its previous
//! value. Exchanging the two sums gives one set of weights per chain state,
//! `v_i = (-1)^i C(k+1, i+1)`, so a single chain of length `k` feeds every
//! order `j <= k` at once.

use rand::RngCore;

use crate::error::{Error, Result};
use crate::functionals::Functional;
use crate::linalg::ParamVector;
use crate::models::{Data, Model};
use crate::rng::StreamKey;

/// Largest supported correction order.
pub const MAX_ORDER: usize = 12;

/// Fraction of inner chains allowed to abort before an estimate is rejected.
pub const MAX_ABORT_FRACTION: f64 = 0.01;

/// Exact binomial coefficient for `n <= 62`.
pub fn binomial(n: u32, k: u32) -> i64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i64 = 1;
    for i in 0..k {
        acc = acc * i64::from(n - i) / i64::from(i + 1);
    }
    acc
}

fn check_order(k: usize) -> Result<()> {
    if k > MAX_ORDER {
        Err(Error::Size(format!(
            "order {k} exceeds the supported maximum {MAX_ORDER}"
        )))
    } else {
        Ok(())
    }
}

/// `w_j = (-1)^{k-j} C(k, j)`, `j = 0..=k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DifferenceWeights {
    pub order: usize,
    pub weights: Vec<i64>,
}

/// `v_i = (-1)^i C(k+1, i+1)`, `i = 0..=k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollapsedWeights {
    pub order: usize,
    pub weights: Vec<i64>,
}

pub fn difference_weights(k: usize) -> Result<DifferenceWeights> {
    check_order(k)?;
    let weights = (0..=k)
        .map(|j| {
            let sign = if (k - j) % 2 == 0 { 1 } else { -1 };
            sign * binomial(k as u32, j as u32)
        })
        .collect();
    Ok(DifferenceWeights { order: k, weights })
}

pub fn collapsed_weights(k: usize) -> Result<CollapsedWeights> {
    check_order(k)?;
    let weights = (0..=k)
        .map(|i| {
            let sign = if i % 2 == 0 { 1 } else { -1 };
            sign * binomial(k as u32 + 1, i as u32 + 1)
        })
        .collect();
    Ok(CollapsedWeights { order: k, weights })
}

/// One transition of a Markov chain on the parameter space.
pub trait Kernel: Sync {
    fn step(&self, state: &ParamVector, rng: &mut dyn RngCore) -> Result<ParamVector>;
}

/// The parametric-bootstrap kernel `P(theta; .)` of a model at sample size `n`.
pub struct BootstrapKernel<'a> {
    pub model: &'a dyn Model,
    pub n: usize,
}

impl Kernel for BootstrapKernel<'_> {
    fn step(&self, state: &ParamVector, rng: &mut dyn RngCore) -> Result<ParamVector> {
        self.model.draw_estimate(state, self.n, rng)
    }
}

/// One realization `(theta^(0), ..., theta^(k))` of a chain.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainPath {
    states: Vec<ParamVector>,
}

impl ChainPath {
    pub fn from_states(states: Vec<ParamVector>) -> Result<Self> {
        let d = states
            .first()
            .ok_or_else(|| Error::Size("a chain has at least its start state".into()))?
            .dim();
        if let Some(bad) = states.iter().find(|s| s.dim() != d) {
            return Err(Error::Dimension {
                expected: d,
                got: bad.dim(),
            });
        }
        Ok(ChainPath { states })
    }

    pub fn start(&self) -> &ParamVector {
        &self.states[0]
    }

    pub fn end(&self) -> &ParamVector {
        self.states.last().expect("non-empty")
    }

    /// Number of transitions `k`.
    pub fn len(&self) -> usize {
        self.states.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn states(&self) -> &[ParamVector] {
        &self.states
    }
}

pub fn run_chain(
    kernel: &dyn Kernel,
    start: &ParamVector,
    k: usize,
    rng: &mut dyn RngCore,
) -> Result<ChainPath> {
    let mut states = Vec::with_capacity(k + 1);
    states.push(start.clone());
    for _ in 0..k {
        let next = kernel.step(states.last().expect("non-empty"), rng)?;
        states.push(next);
    }
    Ok(ChainPath { states })
}

/// Bootstrap chain of length `k` started at `start`, one fresh data set per step.
pub fn simulate_chain(
    model: &dyn Model,
    start: &ParamVector,
    k: usize,
    n: usize,
    rng: &mut dyn RngCore,
) -> Result<ChainPath> {
    model.check_domain(start)?;
    run_chain(&BootstrapKernel { model, n }, start, k, rng)
}

/// A Monte Carlo mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub se: f64,
    pub used: usize,
    pub aborted: usize,
}

pub(crate) fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

/// `sum_i w_i f(states[i])` for integer weights over a chain prefix.
pub fn weighted_sum(f: &dyn Functional, states: &[ParamVector], weights: &[i64]) -> f64 {
    states
        .iter()
        .zip(weights)
        .map(|(s, w)| *w as f64 * f.value(s))
        .sum()
}

/// Monte Carlo estimate of `(B^j f)(theta)` from `m` independent chains.
#[allow(clippy::too_many_arguments)]
pub fn estimate_bjf(
    model: &dyn Model,
    f: &dyn Functional,
    theta: &ParamVector,
    j: usize,
    n: usize,
    m: usize,
    rng: &mut dyn RngCore,
) -> Result<McEstimate> {
    if j == 0 {
        return Err(Error::Size("order j must be >= 1".into()));
    }
    if m < 2 {
        return Err(Error::Size("need at least 2 chains".into()));
    }
    let w = difference_weights(j)?;
    let kernel = BootstrapKernel { model, n };
    let mut values = Vec::with_capacity(m);
    let mut aborted = 0;
    for _ in 0..m {
        match run_chain(&kernel, theta, j, rng) {
            Ok(path) => values.push(weighted_sum(f, path.states(), &w.weights)),
            Err(_) => aborted += 1,
        }
    }
    if values.is_empty() {
        return Err(Error::Estimation(format!("all {m} chains aborted")));
    }
    let (mean, se) = mean_and_se(&values);
    Ok(McEstimate {
        mean,
        se,
        used: values.len(),
        aborted,
    })
}

/// `(1/M) sum_chains sum_i v_i f(theta^(i))` over `m` chains of length `k`
/// driven by `kernel` from `start`, chain `c` using stream `c + 1` of `key`.
///
/// `k = 0` returns `f(start)` without simulation.
pub fn corrected_value(
    kernel: &dyn Kernel,
    f: &dyn Functional,
    start: &ParamVector,
    k: usize,
    m: usize,
    key: &StreamKey,
) -> Result<f64> {
    Ok(corrected_values(kernel, f, start, k, m, key)?.values[k])
}

/// Corrected values of every order `0..=k`, all computed from the same `m`
/// chains of length `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderValues {
    /// `values[j]` estimates `f_j(start)`.
    pub values: Vec<f64>,
    /// Chains discarded because a step failed.
    pub aborted: usize,
}

/// Like [`corrected_value`] but returns every order at once. Because chain
/// `c` always uses stream `c + 1`, `values[j]` equals `corrected_value` at
/// order `j` whenever no chain aborts.
pub fn corrected_values(
    kernel: &dyn Kernel,
    f: &dyn Functional,
    start: &ParamVector,
    k: usize,
    m: usize,
    key: &StreamKey,
) -> Result<OrderValues> {
    let f0 = f.value(start);
    if k == 0 {
        return Ok(OrderValues {
            values: vec![f0],
            aborted: 0,
        });
    }
    if m == 0 {
        return Err(Error::Size("need at least one chain for k >= 1".into()));
    }
    let weights = (1..=k)
        .map(|j| collapsed_weights(j).map(|v| v.weights))
        .collect::<Result<Vec<_>>>()?;
    let mut totals = vec![0.0; k];
    let mut fs = Vec::with_capacity(k + 1);
    let mut used = 0usize;
    let mut aborted = 0usize;
    for c in 0..m {
        let mut rng = key.stream(c as u64 + 1);
        fs.clear();
        fs.push(f0);
        if chain_values(kernel, f, start, k, &mut fs, &mut rng).is_err() {
            aborted += 1;
            continue;
        }
        used += 1;
        for (total, w) in totals.iter_mut().zip(&weights) {
            let mut acc = w[0] as f64 * fs[0];
            for (wi, fi) in w[1..].iter().zip(&fs[1..]) {
                acc += *wi as f64 * fi;
            }
            *total += acc;
        }
    }
    if aborted as f64 > MAX_ABORT_FRACTION * m as f64 {
        return Err(Error::Estimation(format!(
            "{aborted} of {m} chains aborted"
        )));
    }
    let mut values = Vec::with_capacity(k + 1);
    values.push(f0);
    values.extend(totals.iter().map(|t| t / used as f64));
    Ok(OrderValues { values, aborted })
}

fn chain_values(
    kernel: &dyn Kernel,
    f: &dyn Functional,
    start: &ParamVector,
    k: usize,
    out: &mut Vec<f64>,
    rng: &mut dyn RngCore,
) -> Result<()> {
    let mut state = start.clone();
    for _ in 0..k {
        state = kernel.step(&state, rng)?;
        out.push(f.value(&state));
    }
    Ok(())
}

/// Bias-corrected estimate `f_k(theta_hat)` from observed data.
pub fn fk_estimate(
    model: &dyn Model,
    f: &dyn Functional,
    data: &Data,
    k: usize,
    n: usize,
    m: usize,
    key: &StreamKey,
) -> Result<f64> {
    let theta_hat = model.estimate(data)?;
    fk_at(model, f, &theta_hat, k, n, m, key)
}

/// `f_k` evaluated by simulation at a given estimate.
pub fn fk_at(
    model: &dyn Model,
    f: &dyn Functional,
    theta_hat: &ParamVector,
    k: usize,
    n: usize,
    m: usize,
    key: &StreamKey,
) -> Result<f64> {
    corrected_value(&BootstrapKernel { model, n }, f, theta_hat, k, m, key)
}

/// Collapsed-weight average over fixed chains, the quantity [`fk_estimate`]
/// returns.
pub fn collapsed_average(f: &dyn Functional, paths: &[ChainPath], k: usize) -> Result<f64> {
    let v = collapsed_weights(k)?;
    let total: f64 = paths
        .iter()
        .map(|p| weighted_sum(f, &p.states()[..=k], &v.weights))
        .sum();
    Ok(total / paths.len() as f64)
}

/// `sum_j (-1)^j (average j-th difference over the chains' prefixes)`,
/// order by order. Same value as [`collapsed_average`] on the same chains.
pub fn neumann_average(f: &dyn Functional, paths: &[ChainPath], k: usize) -> Result<f64> {
    let mut total = 0.0;
    for j in 0..=k {
        let w = difference_weights(j)?;
        let avg: f64 = paths
            .iter()
            .map(|p| weighted_sum(f, &p.states()[..=j], &w.weights))
            .sum::<f64>()
            / paths.len() as f64;
        total += if j % 2 == 0 { avg } else { -avg };
    }
    Ok(total)
}

/// Exact `|B^{k+1} f(theta)|` for `f = exp(<u, .>)` under the Gaussian shift
/// model with `Sigma = sigma^2 I`: `T f = f e^a` with `a = sigma^2 |u|^2 / (2n)`,
/// hence `B^j f = f (e^a - 1)^j`.
///
/// The signed bias of `f_k(theta_hat)` is `(-1)^k` times this value.
pub fn bias_oracle_exp(theta: &ParamVector, u: &ParamVector, sigma2: f64, n: usize, k: usize) -> f64 {
    let a = sigma2 * u.norm_sq() / (2.0 * n as f64);
    theta.dot(u).exp() * a.exp_m1().powi(k as i32 + 1)
}
