//! Empirical distances between one-dimensional samples.

use rand::{Rng, RngCore};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// A finite real sample of size at least 2, kept sorted.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleVec {
    sorted: Vec<f64>,
}

impl SampleVec {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Size(format!(
                "sample needs at least 2 values, got {}",
                values.len()
            )));
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("sample"));
        }
        values.sort_by(f64::total_cmp);
        Ok(SampleVec { sorted: values })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }
}

impl TryFrom<Vec<f64>> for SampleVec {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        SampleVec::new(v)
    }
}

/// Standard normal CDF.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `sup_x |F_N(x) - Phi(x)|` for the empirical CDF `F_N` of `s`.
pub fn kolmogorov_to_std_normal(s: &SampleVec) -> f64 {
    let n = s.len() as f64;
    s.sorted
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let phi = std_normal_cdf(*x);
            let hi = (i + 1) as f64 / n;
            let lo = i as f64 / n;
            (hi - phi).abs().max((phi - lo).abs())
        })
        .fold(0.0, f64::max)
}

fn check_same_len(a: &SampleVec, b: &SampleVec) -> Result<()> {
    if a.len() != b.len() {
        Err(Error::Dimension {
            expected: a.len(),
            got: b.len(),
        })
    } else {
        Ok(())
    }
}

/// `W_1` between two equal-size samples: mean absolute difference of order
/// statistics.
pub fn wasserstein1(a: &SampleVec, b: &SampleVec) -> Result<f64> {
    check_same_len(a, b)?;
    let sum: f64 = a
        .sorted
        .iter()
        .zip(&b.sorted)
        .map(|(x, y)| (x - y).abs())
        .sum();
    Ok(sum / a.len() as f64)
}

/// `W_2` between two equal-size samples.
pub fn wasserstein2(a: &SampleVec, b: &SampleVec) -> Result<f64> {
    check_same_len(a, b)?;
    let sum: f64 = a
        .sorted
        .iter()
        .zip(&b.sorted)
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok((sum / a.len() as f64).sqrt())
}

/// Bootstrap standard deviation of the `W_1` statistic: both samples are
/// resampled with replacement `resamples` times.
pub fn w1_bootstrap_se(
    a: &SampleVec,
    b: &SampleVec,
    resamples: usize,
    rng: &mut dyn RngCore,
) -> Result<f64> {
    check_same_len(a, b)?;
    if resamples < 2 {
        return Err(Error::Size("need at least 2 resamples".into()));
    }
    let n = a.len();
    let mut stats = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let ra: Vec<f64> = (0..n).map(|_| a.sorted[rng.random_range(0..n)]).collect();
        let rb: Vec<f64> = (0..n).map(|_| b.sorted[rng.random_range(0..n)]).collect();
        stats.push(wasserstein1(&SampleVec::new(ra)?, &SampleVec::new(rb)?)?);
    }
    let mean = stats.iter().sum::<f64>() / resamples as f64;
    let var = stats.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (resamples as f64 - 1.0);
    Ok(var.sqrt())
}

/// Absolute slack allowed on top of the resampling band when two samples
/// should have the same law.
pub const W1_ABS_SLACK: f64 = 0.01;

/// Threshold `0.01 + 3 * bootstrap SE` for equal-law `W_1` checks.
pub fn w1_equal_law_band(
    a: &SampleVec,
    b: &SampleVec,
    resamples: usize,
    rng: &mut dyn RngCore,
) -> Result<f64> {
    Ok(W1_ABS_SLACK + 3.0 * w1_bootstrap_se(a, b, resamples, rng)?)
}
