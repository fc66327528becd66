//! Fast deterministic identity checks run by `bootbias selftest`.

use bootbias::bootstrap::{collapsed_weights, difference_weights, MAX_ORDER};
use bootbias::distances::{std_normal_cdf, wasserstein1, wasserstein2, SampleVec};
use bootbias::linalg::ParamVector;
use bootbias::pauli::{from_coefficients, hs_inner, pauli_basis, to_coefficients};

/// Binomial coefficient source used as the reference for the weight checks.
pub type BinomialFn = dyn Fn(u32, u32) -> i64;

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub outcome: Result<(), String>,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.outcome.is_ok()
    }

    pub fn line(&self) -> String {
        match &self.outcome {
            Ok(()) => format!("PASS  {}", self.name),
            Err(why) => format!("FAIL  {}: {why}", self.name),
        }
    }
}

/// All checks against the library's own binomial coefficients.
pub fn run_checks() -> Vec<Check> {
    run_checks_with(&bootbias::bootstrap::binomial)
}

/// All checks, with `binomial` as the reference table.
pub fn run_checks_with(binomial: &BinomialFn) -> Vec<Check> {
    vec![
        check("binomial table", || binomial_table(binomial)),
        check("difference weights", || difference(binomial)),
        check("collapsed weights", || collapsed(binomial)),
        check("pauli orthonormality", pauli),
        check("normal cdf accuracy", normal_cdf),
        check("wasserstein axioms", wasserstein_axioms),
    ]
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(), String>) -> Check {
    Check {
        name,
        outcome: f(),
    }
}

fn sign(i: usize) -> i64 {
    if i % 2 == 0 {
        1
    } else {
        -1
    }
}

fn binomial_table(binomial: &BinomialFn) -> Result<(), String> {
    let top = MAX_ORDER as u32 + 1;
    for n in 0..=top {
        for k in 0..=n {
            let expected = if k == 0 || k == n {
                1
            } else {
                binomial(n - 1, k - 1) + binomial(n - 1, k)
            };
            if binomial(n, k) != expected {
                return Err(format!("C({n},{k}) = {} breaks Pascal's rule", binomial(n, k)));
            }
        }
    }
    Ok(())
}

fn difference(binomial: &BinomialFn) -> Result<(), String> {
    for k in 0..=MAX_ORDER {
        let w = difference_weights(k).map_err(|e| e.to_string())?.weights;
        for (j, wj) in w.iter().enumerate() {
            let expected = sign(k - j) * binomial(k as u32, j as u32);
            if *wj != expected {
                return Err(format!("k={k} j={j}: {wj} != {expected}"));
            }
        }
        let total: i64 = w.iter().sum();
        if k >= 1 && total != 0 {
            return Err(format!("k={k}: weights sum to {total}"));
        }
    }
    Ok(())
}

fn collapsed(binomial: &BinomialFn) -> Result<(), String> {
    for k in 0..=MAX_ORDER {
        let v = collapsed_weights(k).map_err(|e| e.to_string())?.weights;
        for (i, vi) in v.iter().enumerate() {
            let expected: i64 = (i..=k)
                .map(|j| sign(i) * binomial(j as u32, i as u32))
                .sum();
            if *vi != expected {
                return Err(format!("k={k} i={i}: {vi} != {expected}"));
            }
        }
        let total: i64 = v.iter().sum();
        if total != 1 {
            return Err(format!("k={k}: weights sum to {total}"));
        }
    }
    Ok(())
}

fn pauli() -> Result<(), String> {
    for l in 1..=3usize {
        let basis = pauli_basis(l).map_err(|e| e.to_string())?;
        let bound = 2f64.powf(-(l as f64) / 2.0) + 1e-12;
        for (a, ea) in basis.iter().enumerate() {
            for (b, eb) in basis.iter().enumerate() {
                let g = hs_inner(ea, eb).map_err(|e| e.to_string())?;
                let target = if a == b { 1.0 } else { 0.0 };
                if (g - target).abs() > 1e-12 {
                    return Err(format!("l={l}: <E{a}, E{b}> = {g}"));
                }
            }
            let norm = ea.operator_norm().map_err(|e| e.to_string())?;
            if norm > bound {
                return Err(format!("l={l}: ||E{a}|| = {norm} > {bound}"));
            }
        }
        let coeffs: Vec<f64> = (0..basis.len()).map(|i| (1.0 + i as f64).sin()).collect();
        let coeffs = ParamVector::new(coeffs).map_err(|e| e.to_string())?;
        let h = from_coefficients(&coeffs, &basis).map_err(|e| e.to_string())?;
        let back = to_coefficients(&h, &basis).map_err(|e| e.to_string())?;
        let again = from_coefficients(&back, &basis).map_err(|e| e.to_string())?;
        let err = coeffs.distance(&back).max(h.max_abs_diff(&again));
        if err > 1e-10 {
            return Err(format!("l={l}: round trip error {err:e}"));
        }
    }
    Ok(())
}

/// Accuracy promised by the library's normal CDF.
const PHI_TOLERANCE: f64 = 1e-10;

fn normal_cdf() -> Result<(), String> {
    let table = [
        (0.0, 0.5),
        (1.0, 0.841_344_746_068_542_9),
        (-1.96, 0.024_997_895_148_220_435),
        (3.0, 0.998_650_101_968_369_9),
        (-6.0, 9.865_876_450_376_981e-10),
    ];
    for (x, p) in table {
        let got = std_normal_cdf(x);
        if (got - p).abs() > PHI_TOLERANCE {
            return Err(format!("Phi({x}) = {got}, expected {p}"));
        }
    }
    Ok(())
}

fn samples(seed: f64, len: usize, shift: f64) -> Result<SampleVec, String> {
    let v = (0..len)
        .map(|i| (seed * (i as f64 + 1.0)).sin() * 2.0 + shift)
        .collect();
    SampleVec::new(v).map_err(|e| e.to_string())
}

fn wasserstein_axioms() -> Result<(), String> {
    let err = |e: bootbias::Error| e.to_string();
    let a = samples(0.7, 500, 0.0)?;
    let b = samples(1.3, 500, 0.4)?;
    let c = samples(2.9, 500, -0.2)?;
    if wasserstein1(&a, &a).map_err(err)? != 0.0 || wasserstein2(&a, &a).map_err(err)? != 0.0 {
        return Err("W_p(a, a) != 0".into());
    }
    let (ab, ba) = (wasserstein1(&a, &b).map_err(err)?, wasserstein1(&b, &a).map_err(err)?);
    if ab != ba {
        return Err(format!("W1 not symmetric: {ab} vs {ba}"));
    }
    let (bc, ac) = (wasserstein1(&b, &c).map_err(err)?, wasserstein1(&a, &c).map_err(err)?);
    if ac > ab + bc + 1e-12 {
        return Err(format!("triangle inequality: {ac} > {ab} + {bc}"));
    }
    let w2 = wasserstein2(&a, &b).map_err(err)?;
    if ab > w2 + 1e-12 {
        return Err(format!("W1 = {ab} exceeds W2 = {w2}"));
    }
    let shifted = samples(0.7, 500, 0.75)?;
    let w = wasserstein1(&a, &shifted).map_err(err)?;
    if (w - 0.75).abs() > 1e-12 {
        return Err(format!("W1 of a shift by 0.75 is {w}"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        let checks = run_checks();
        assert_eq!(checks.len(), 6);
        for c in &checks {
            assert!(c.passed(), "{}", c.line());
            assert!(c.line().starts_with("PASS  "));
        }
    }

    #[test]
    fn corrupted_binomial_table_fails() {
        let corrupt = |n: u32, k: u32| {
            let c = bootbias::bootstrap::binomial(n, k);
            if (n, k) == (7, 3) {
                c + 1
            } else {
                c
            }
        };
        let checks = run_checks_with(&corrupt);
        let failed: Vec<&str> = checks.iter().filter(|c| !c.passed()).map(|c| c.name).collect();
        assert_eq!(failed, vec!["binomial table", "difference weights", "collapsed weights"]);
        assert!(checks[0].line().starts_with("FAIL  binomial table: "));
    }
}
