use rand::{Rng, RngCore};
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

/// Standardized scalar noise: every variant has mean 0 and variance 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseDist {
    Rademacher,
    /// Uniform on `[-sqrt 3, sqrt 3]`.
    Uniform,
    /// `Exp(1) - 1`; third moment 2.
    CenteredExponential,
    Gaussian,
}

const SQRT_3: f64 = 1.732_050_807_568_877_2;

impl NoiseDist {
    pub fn mean(&self) -> f64 {
        0.0
    }

    pub fn variance(&self) -> f64 {
        match self {
            NoiseDist::Rademacher => 1.0,
            // (2 sqrt 3)^2 / 12
            NoiseDist::Uniform => (2.0 * SQRT_3).powi(2) / 12.0,
            NoiseDist::CenteredExponential => 1.0,
            NoiseDist::Gaussian => 1.0,
        }
    }

    pub fn third_moment(&self) -> f64 {
        match self {
            NoiseDist::CenteredExponential => 2.0,
            _ => 0.0,
        }
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        match self {
            NoiseDist::Rademacher => {
                if rng.next_u32() & 1 == 1 {
                    1.0
                } else {
                    -1.0
                }
            }
            NoiseDist::Uniform => rng.random_range(-SQRT_3..SQRT_3),
            NoiseDist::CenteredExponential => {
                let e: f64 = Exp1.sample(rng);
                e - 1.0
            }
            NoiseDist::Gaussian => StandardNormal.sample(rng),
        }
    }

    /// Mean of `n` independent draws.
    ///
    /// Rademacher sums count set bits of uniform words; Gaussian means are
    /// drawn directly as `N(0, 1/n)`. Both are exact in distribution.
    pub fn sample_mean(&self, n: usize, rng: &mut dyn RngCore) -> f64 {
        match self {
            NoiseDist::Rademacher => {
                let mut ones: u64 = 0;
                let mut left = n;
                while left >= 64 {
                    ones += u64::from(rng.next_u64().count_ones());
                    left -= 64;
                }
                if left > 0 {
                    let mask = (1u64 << left) - 1;
                    ones += u64::from((rng.next_u64() & mask).count_ones());
                }
                (2.0 * ones as f64 - n as f64) / n as f64
            }
            NoiseDist::Gaussian => {
                let z: f64 = StandardNormal.sample(rng);
                z / (n as f64).sqrt()
            }
            _ => (0..n).map(|_| self.sample(rng)).sum::<f64>() / n as f64,
        }
    }
}
