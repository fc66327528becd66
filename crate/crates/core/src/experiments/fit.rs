use serde::Serialize;

use crate::error::{Error, Result};

/// Least-squares line through `(log n, log y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Rate fit over a sweep: needs at least three grid points.
pub fn rate_fit(ns: &[f64], rmses: &[f64]) -> Result<RateFit> {
    loglog_fit(ns, rmses, 3)
}

/// OLS on logs with a configurable minimum number of points (at least 2).
pub fn loglog_fit(xs: &[f64], ys: &[f64], min_points: usize) -> Result<RateFit> {
    if xs.len() != ys.len() {
        return Err(Error::Dimension {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    let min_points = min_points.max(2);
    if xs.len() < min_points {
        return Err(Error::Size(format!(
            "need at least {min_points} points, got {}",
            xs.len()
        )));
    }
    if let Some(bad) = xs.iter().chain(ys).find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::Domain(format!("log-log fit needs positive finite values, got {bad}")));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let m = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("all x values are equal".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let sse: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(RateFit {
        slope,
        intercept,
        r2,
    })
}
