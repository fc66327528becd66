use super::*;
use crate::bootstrap::{collapsed_weights, fk_at, simulate_chain};
use crate::distances::{w1_equal_law_band, wasserstein1, SampleVec};
use crate::functionals::{ExpLinear, Linear, QuadraticForm};
use crate::models::{ExponentialFamily, GaussianShift, ScalingMap};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pv(v: &[f64]) -> ParamVector {
    ParamVector::new(v.to_vec()).unwrap()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn tanh_model(d: usize) -> GaussianShift {
    GaussianShift::new(
        d,
        ScalingMap::Diagonal {
            a: vec![1.0; d],
            b: vec![0.5; d],
        },
    )
    .unwrap()
}

#[test]
fn truncation_rule_basics() {
    let t = TruncationRule::new(0.5, 16).unwrap();
    assert_eq!(t.threshold(), 2.0);
    assert!(t.keeps(&pv(&[1.0, 1.0])));
    assert!(!t.keeps(&pv(&[2.0, 0.0])));
    assert!(TruncationRule::new(0.0, 16).is_err());
    assert!(TruncationRule::new(1.0, 0).is_err());
    assert!(TruncationRule::new(f64::INFINITY, 4).unwrap().keeps(&pv(&[1e300])));
}

#[test]
fn total_truncation_freezes_chain() {
    let model = tanh_model(3);
    let theta = pv(&[0.1, 0.2, 0.3]);
    let t = TruncationRule::new(1e-300, 10).unwrap();
    let path = simulate_tilde_chain(&model, &theta, 6, 10, Some(t), &mut rng(0)).unwrap();
    assert!(path.states().iter().all(|s| *s == theta));
}

#[test]
fn untruncated_surrogate_chain_is_the_bootstrap_chain() {
    // identical kernel and identical draws for the Gaussian shift model
    let model = tanh_model(3);
    let theta = pv(&[0.1, -0.4, 0.3]);
    for seed in 0..50 {
        let hat = simulate_chain(&model, &theta, 4, 7, &mut rng(seed)).unwrap();
        let tilde = simulate_tilde_chain(&model, &theta, 4, 7, None, &mut rng(seed)).unwrap();
        assert_eq!(hat, tilde);
    }
}

#[test]
fn untruncated_pushforwards_agree_in_w1() {
    let model = tanh_model(2);
    let f = ExpLinear {
        u: pv(&[0.6, 0.8]),
    };
    let theta = pv(&[0.2, 0.1]);
    let m = 20_000;
    let mut r = rng(1);
    let mut hat = Vec::with_capacity(m);
    let mut tilde = Vec::with_capacity(m);
    for _ in 0..m {
        hat.push(f.value(simulate_chain(&model, &theta, 2, 10, &mut r).unwrap().end()));
        tilde.push(f.value(
            simulate_tilde_chain(&model, &theta, 2, 10, None, &mut r)
                .unwrap()
                .end(),
        ));
    }
    let a = SampleVec::new(hat).unwrap();
    let b = SampleVec::new(tilde).unwrap();
    let w = wasserstein1(&a, &b).unwrap();
    assert!(w <= w1_equal_law_band(&a, &b, 50, &mut rng(2)).unwrap(), "{w}");
}

fn assert_contained(model: &dyn Model, theta: &ParamVector, n: usize, delta: f64, seed: u64) -> usize {
    let t = TruncationRule::new(delta, n).unwrap();
    let origin = model.to_surrogate(theta).unwrap();
    let mut r = rng(seed);
    let mut frozen_steps = 0;
    for _ in 0..10_000 {
        let path = simulate_tilde_chain(model, theta, 5, n, Some(t), &mut r).unwrap();
        for (j, s) in path.states().iter().enumerate() {
            let dist = model.to_surrogate(s).unwrap().distance(&origin);
            assert!(dist <= j as f64 * delta, "step {j}: {dist} > {}", j as f64 * delta);
        }
        frozen_steps += path.states().windows(2).filter(|w| w[0] == w[1]).count();
    }
    frozen_steps
}

#[test]
fn truncated_chains_stay_in_the_tube() {
    // delta small enough that truncation fires often
    let model = tanh_model(4);
    let theta = pv(&[0.0, 0.5, -0.5, 1.0]);
    let frozen = assert_contained(&model, &theta, 25, 0.4, 3);
    assert!(frozen > 1000, "{frozen}");

    // surrogate coordinates of the Poisson family are mean coordinates
    let model = ExponentialFamily::poisson(2).unwrap();
    let theta = pv(&[1.0, 2.0]);
    let frozen = assert_contained(&model, &theta, 100, 0.6, 4);
    assert!(frozen > 1000, "{frozen}");
}

#[test]
fn default_delta_rarely_truncates() {
    let model = tanh_model(5);
    let theta = ParamVector::zeros(5);
    let n = 50;
    let delta = default_delta(&model, &theta, n).unwrap();
    let t = TruncationRule::new(delta, n).unwrap();
    let mut r = rng(5);
    let cut = (0..20_000)
        .filter(|_| !t.keeps(&model.sample_xi(&theta, &mut r).unwrap()))
        .count();
    assert_eq!(cut, 0);
}

#[test]
fn sigma_f_examples() {
    let d = 3;
    let unit = GaussianShift::isotropic(d, 1.0).unwrap();
    let u = pv(&[1.0, -2.0, 2.0]);
    let theta = pv(&[0.5, 0.25, -1.0]);
    let lin = Linear { u: u.clone() };
    assert!((sigma_f(&unit, &lin, &theta).unwrap() - 3.0).abs() < 1e-15);

    let sigma = 0.7;
    let iso = GaussianShift::isotropic(d, sigma).unwrap();
    let q = QuadraticForm::identity(d);
    let expected = 2.0 * sigma * theta.norm();
    assert!((sigma_f(&iso, &q, &theta).unwrap() - expected).abs() < 1e-14);

    let e = ExpLinear { u: u.clone() };
    assert!((sigma_f(&unit, &e, &ParamVector::zeros(d)).unwrap() - 3.0).abs() < 1e-15);

    // equals |f'| when Sigma = I; zero noise gives zero
    assert!((sigma_f(&unit, &q, &theta).unwrap() - q.grad(&theta).norm()).abs() < 1e-15);
    let zero = GaussianShift::isotropic(d, 0.0).unwrap();
    assert_eq!(sigma_f(&zero, &q, &theta).unwrap(), 0.0);
}

#[test]
fn sigma_f_for_poisson_uses_mean_coordinates() {
    // f(theta) = theta_1 = log v_1: derivative in v is e^{-theta}, Sigma = e^theta
    let model = ExponentialFamily::poisson(2).unwrap();
    let f = Linear { u: pv(&[1.0, 0.0]) };
    let theta = pv(&[0.8, 0.3]);
    let s = sigma_f(&model, &f, &theta).unwrap();
    assert!((s - (-0.4f64).exp()).abs() < 1e-14);
}

#[test]
fn superposition_flag_extremes() {
    let model = tanh_model(3);
    let theta = pv(&[0.3, -0.3, 0.0]);
    let zeros = HomotopyFlags(vec![false; 3]);
    assert_eq!(superposition_eval(&model, &theta, &zeros, 9, &mut rng(6)).unwrap(), theta);

    let ones = HomotopyFlags(vec![true; 3]);
    for seed in 0..20 {
        let g = superposition_eval(&model, &theta, &ones, 9, &mut rng(seed)).unwrap();
        let path = simulate_tilde_chain(&model, &theta, 3, 9, None, &mut rng(seed)).unwrap();
        assert_eq!(&g, path.end());
    }
}

#[test]
fn flag_enumeration() {
    let all = HomotopyFlags::all(3);
    assert_eq!(all.len(), 8);
    assert_eq!(all[5], HomotopyFlags(vec![true, false, true]));
    let ones: Vec<usize> = all.iter().map(|f| f.ones()).collect();
    assert_eq!(ones, vec![0, 1, 1, 2, 1, 2, 2, 3]);
    assert!(HomotopyFlags::all(0)[0].is_empty());
}

#[test]
fn superposition_matches_chain_of_length_ones() {
    let model = tanh_model(2);
    let f = QuadraticForm::identity(2);
    let theta = pv(&[0.4, -0.1]);
    let n = 5;
    let m = 20_000;
    let flags = HomotopyFlags(vec![true, false, true]);
    let mut r = rng(7);
    let g: Vec<f64> = (0..m)
        .map(|_| f.value(&superposition_eval(&model, &theta, &flags, n, &mut r).unwrap()))
        .collect();
    let c: Vec<f64> = (0..m)
        .map(|_| {
            f.value(
                simulate_tilde_chain(&model, &theta, flags.ones(), n, None, &mut r)
                    .unwrap()
                    .end(),
            )
        })
        .collect();
    let a = SampleVec::new(g).unwrap();
    let b = SampleVec::new(c).unwrap();
    let w = wasserstein1(&a, &b).unwrap();
    assert!(w <= w1_equal_law_band(&a, &b, 50, &mut rng(8)).unwrap(), "{w}");
}

#[test]
fn tilde_fk_without_truncation_equals_fk() {
    let model = tanh_model(3);
    let f = ExpLinear {
        u: pv(&[0.5, 0.5, 0.0]),
    };
    let n = 20;
    let mut diffs = Vec::new();
    for r in 0..200u64 {
        let key = StreamKey::new(9).with_replicate(r);
        let theta_hat = model
            .draw_estimate(&pv(&[0.1, 0.2, 0.3]), n, &mut key.stream(0))
            .unwrap();
        let a = fk_at(&model, &f, &theta_hat, 2, n, 30, &key).unwrap();
        let b = tilde_fk_estimate(&model, &f, &theta_hat, 2, n, None, 30, &key).unwrap();
        diffs.push(a - b);
    }
    // same kernel, same streams: the paired difference is exactly zero
    assert!(diffs.iter().all(|d| *d == 0.0));
}

#[test]
fn tilde_fk_degenerate_cases() {
    let f = QuadraticForm::identity(2);
    let theta_hat = pv(&[1.0, -2.0]);
    let key = StreamKey::new(10);
    let silent = GaussianShift::isotropic(2, 0.0).unwrap();
    for k in 0..=4 {
        for delta in [None, Some(0.1), Some(f64::INFINITY)] {
            let v = tilde_fk_estimate(&silent, &f, &theta_hat, k, 10, delta, 5, &key).unwrap();
            assert!((v - 5.0).abs() < 1e-12, "k={k} delta={delta:?}: {v}");
        }
    }
    let noisy = tanh_model(2);
    for k in 1..=6 {
        let v = tilde_fk_estimate(&noisy, &f, &theta_hat, k, 10, Some(1e-300), 5, &key).unwrap();
        assert!((v - 5.0).abs() < 1e-12, "k={k}: {v}");
    }
}

#[test]
fn collapsed_weights_sum_to_one() {
    for k in 0..=crate::bootstrap::MAX_ORDER {
        assert_eq!(collapsed_weights(k).unwrap().weights.iter().sum::<i64>(), 1);
    }
}

#[test]
fn sigma_f_predicts_plug_in_spread() {
    let d = 3;
    let n = 200;
    let model = tanh_model(d);
    let f = Linear {
        u: pv(&[1.0, 2.0, -1.0]),
    };
    let theta = pv(&[0.5, -1.0, 0.2]);
    let target = sigma_f(&model, &f, &theta).unwrap();
    let mut r = rng(11);
    let reps = 10_000;
    let errs: Vec<f64> = (0..reps)
        .map(|_| {
            let est = model.draw_estimate(&theta, n, &mut r).unwrap();
            (n as f64).sqrt() * (f.value(&est) - f.value(&theta))
        })
        .collect();
    let mean = errs.iter().sum::<f64>() / reps as f64;
    let sd = (errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (reps as f64 - 1.0)).sqrt();
    assert!((sd / target - 1.0).abs() < 0.05, "{sd} vs {target}");
}
