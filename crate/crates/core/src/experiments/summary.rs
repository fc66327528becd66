use serde::Serialize;

use crate::distances::{kolmogorov_to_std_normal, SampleVec};

/// Aggregates of the errors `f_k(theta_hat) - f(theta)` at one grid point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialSummary {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub bias: f64,
    pub se_bias: f64,
    /// Sample standard deviation, denominator `R - 1`.
    pub sd: f64,
    pub rmse: f64,
    pub sqrt_n_rmse: f64,
    pub sigma_f: f64,
    /// Kolmogorov distance of `sqrt(n) err / sigma_f` to `N(0, 1)`; NaN when
    /// `sigma_f = 0` or fewer than two replicates survived.
    pub d_k: f64,
    /// Discarded replicates plus discarded inner chains.
    pub aborts: usize,
    pub seconds: f64,
    /// Replicates that completed.
    pub replicates: usize,
    pub failed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub errors: Option<Vec<f64>>,
}

/// Fold `errors` (in replicate order) into a summary. Timing, aborts and
/// failure flags are filled in by the caller.
pub fn summarize(n: usize, d: usize, k: usize, sigma_f: f64, errors: &[f64]) -> TrialSummary {
    let r = errors.len() as f64;
    let bias = errors.iter().sum::<f64>() / r;
    let ss = errors.iter().map(|e| (e - bias).powi(2)).sum::<f64>();
    let sd = if errors.len() >= 2 {
        (ss / (r - 1.0)).sqrt()
    } else {
        f64::NAN
    };
    let rmse = (errors.iter().map(|e| e * e).sum::<f64>() / r).sqrt();
    let root_n = (n as f64).sqrt();
    let d_k = if sigma_f > 0.0 {
        SampleVec::new(errors.iter().map(|e| root_n * e / sigma_f).collect())
            .map(|s| kolmogorov_to_std_normal(&s))
            .unwrap_or(f64::NAN)
    } else {
        f64::NAN
    };
    TrialSummary {
        n,
        d,
        k,
        bias,
        se_bias: sd / r.sqrt(),
        sd,
        rmse,
        sqrt_n_rmse: root_n * rmse,
        sigma_f,
        d_k,
        aborts: 0,
        seconds: 0.0,
        replicates: errors.len(),
        failed: false,
        errors: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_example() {
        let s = summarize(4, 1, 0, 1.0, &[1.0, -1.0, 3.0]);
        assert_eq!(s.bias, 1.0);
        assert_eq!(s.sd, 2.0);
        assert!((s.rmse - (11.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((s.sqrt_n_rmse - 2.0 * s.rmse).abs() < 1e-15);
        assert!((s.se_bias - 2.0 / 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(s.replicates, 3);
    }

    #[test]
    fn zero_sigma_has_no_kolmogorov_distance() {
        assert!(summarize(4, 1, 0, 0.0, &[1.0, 2.0]).d_k.is_nan());
    }

    proptest! {
        #[test]
        fn rmse_decomposes(errors in proptest::collection::vec(-10.0f64..10.0, 2..200)) {
            let s = summarize(10, 1, 1, 1.0, &errors);
            let r = errors.len() as f64;
            let rhs = s.bias * s.bias + s.sd * s.sd * (r - 1.0) / r;
            prop_assert!((s.rmse * s.rmse - rhs).abs() <= 1e-10 * (1.0 + rhs));
        }
    }
}
