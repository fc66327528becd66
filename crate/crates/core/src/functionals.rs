//! Smooth target functionals `f: R^d -> R` with analytic gradients.
//!
//! All built-ins are analytic (`C^infinity`). They are chosen so that the
//! iterated bias `B^j f` has a closed form under the Gaussian shift model,
//! which is what the oracle tests lean on.

use std::any::Any;
use std::fmt;

use serde::Deserialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, ParamVector};
use crate::params::VectorRule;
use crate::registry::{parse_params, ComponentSpec, Registry};

/// Default central-difference step.
pub const DEFAULT_STEP: f64 = 1e-5;

pub trait Functional: Send + Sync + fmt::Debug + Any {
    fn name(&self) -> &'static str;

    fn dim(&self) -> usize;

    /// `f(theta)`. Panics if `theta` has the wrong dimension.
    fn value(&self, theta: &ParamVector) -> f64;

    fn grad(&self, theta: &ParamVector) -> ParamVector;

    /// Declared Holder smoothness order.
    fn smoothness(&self) -> f64 {
        f64::INFINITY
    }

    fn as_any(&self) -> &dyn Any;
}

fn assert_dim(d: usize, theta: &ParamVector) {
    assert_eq!(theta.dim(), d, "functional evaluated at wrong dimension");
}

fn scaled(u: &ParamVector, s: f64) -> ParamVector {
    ParamVector::new(u.iter().map(|x| s * x).collect()).expect("finite gradient")
}

/// `<u, theta>`.
#[derive(Clone, Debug)]
pub struct Linear {
    pub u: ParamVector,
}

impl Functional for Linear {
    fn name(&self) -> &'static str {
        "linear"
    }
    fn dim(&self) -> usize {
        self.u.dim()
    }
    fn value(&self, theta: &ParamVector) -> f64 {
        assert_dim(self.dim(), theta);
        self.u.dot(theta)
    }
    fn grad(&self, theta: &ParamVector) -> ParamVector {
        assert_dim(self.dim(), theta);
        self.u.clone()
    }
    fn as_any(&self) -> &dyn Any {
        self
    }
}

/// `<u, theta>^p` for an integer `p >= 1`.
#[derive(Clone, Debug)]
pub struct Power {
    pub u: ParamVector,
    pub p: u32,
}

impl Functional for Power {
    fn name(&self) -> &'static str {
        "power"
    }
    fn dim(&self) -> usize {
        self.u.dim()
    }
    fn value(&self, theta: &ParamVector) -> f64 {
        assert_dim(self.dim(), theta);
        self.u.dot(theta).powi(self.p as i32)
    }
    fn grad(&self, theta: &ParamVector) -> ParamVector {
        assert_dim(self.dim(), theta);
        let x = self.u.dot(theta);
        scaled(&self.u, self.p as f64 * x.powi(self.p as i32 - 1))
    }
    fn as_any(&self) -> &dyn Any {
        self
    }
}

/// `<Q theta, theta>`.
#[derive(Clone, Debug)]
pub struct QuadraticForm {
    pub q: Matrix,
    identity: bool,
}

impl QuadraticForm {
    pub fn new(q: Matrix) -> Result<Self> {
        if q.rows() != q.cols() {
            return Err(Error::config("functional.q", "form matrix must be square"));
        }
        let identity = q == Matrix::identity(q.rows());
        Ok(QuadraticForm { q, identity })
    }

    pub fn identity(d: usize) -> Self {
        QuadraticForm {
            q: Matrix::identity(d),
            identity: true,
        }
    }
}

impl Functional for QuadraticForm {
    fn name(&self) -> &'static str {
        "quadratic_form"
    }
    fn dim(&self) -> usize {
        self.q.rows()
    }
    fn value(&self, theta: &ParamVector) -> f64 {
        assert_dim(self.dim(), theta);
        if self.identity {
            return theta.norm_sq();
        }
        let qt = self.q.mul_slice(theta.as_slice()).expect("checked dimension");
        qt.iter().zip(theta.iter()).map(|(a, b)| a * b).sum()
    }
    fn grad(&self, theta: &ParamVector) -> ParamVector {
        assert_dim(self.dim(), theta);
        let d = self.dim();
        let g = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| (self.q.get(i, j) + self.q.get(j, i)) * theta[j])
                    .sum()
            })
            .collect();
        ParamVector::new(g).expect("finite gradient")
    }
    fn as_any(&self) -> &dyn Any {
        self
    }
}

/// `exp(<u, theta>)`.
#[derive(Clone, Debug)]
pub struct ExpLinear {
    pub u: ParamVector,
}

impl Functional for ExpLinear {
    fn name(&self) -> &'static str {
        "exp_linear"
    }
    fn dim(&self) -> usize {
        self.u.dim()
    }
    fn value(&self, theta: &ParamVector) -> f64 {
        assert_dim(self.dim(), theta);
        self.u.dot(theta).exp()
    }
    fn grad(&self, theta: &ParamVector) -> ParamVector {
        assert_dim(self.dim(), theta);
        scaled(&self.u, self.value(theta))
    }
    fn as_any(&self) -> &dyn Any {
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialProfile {
    /// `g(x) = exp(-x)`
    NegExp,
    /// `g(x) = log(1 + x)`
    Log1p,
}

/// `g(||theta||^2)`.
#[derive(Clone, Debug)]
pub struct Radial {
    pub dim: usize,
    pub profile: RadialProfile,
}

impl Radial {
    fn profile_and_derivative(&self, x: f64) -> (f64, f64) {
        match self.profile {
            RadialProfile::NegExp => {
                let e = (-x).exp();
                (e, -e)
            }
            RadialProfile::Log1p => (x.ln_1p(), 1.0 / (1.0 + x)),
        }
    }
}

impl Functional for Radial {
    fn name(&self) -> &'static str {
        "radial"
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, theta: &ParamVector) -> f64 {
        assert_dim(self.dim, theta);
        self.profile_and_derivative(theta.norm_sq()).0
    }
    fn grad(&self, theta: &ParamVector) -> ParamVector {
        assert_dim(self.dim, theta);
        let (_, dg) = self.profile_and_derivative(theta.norm_sq());
        scaled(theta, 2.0 * dg)
    }
    fn as_any(&self) -> &dyn Any {
        self
    }
}

/// Largest relative discrepancy between central differences and the
/// analytic gradient, `max_i |fd_i - g_i| / (1 + |g_i|)`.
pub fn grad_check(f: &dyn Functional, theta: &ParamVector, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::config("h", "step must be > 0"));
    }
    let g = f.grad(theta);
    let mut worst: f64 = 0.0;
    let mut probe = theta.as_slice().to_vec();
    for i in 0..theta.dim() {
        let orig = probe[i];
        probe[i] = orig + h;
        let up = f.value(&ParamVector::new(probe.clone())?);
        probe[i] = orig - h;
        let down = f.value(&ParamVector::new(probe.clone())?);
        probe[i] = orig;
        let fd = (up - down) / (2.0 * h);
        worst = worst.max((fd - g[i]).abs() / (1.0 + g[i].abs()));
    }
    Ok(worst)
}

pub type FunctionalBuilder = fn(&Value, usize) -> Result<Box<dyn Functional>>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DirectionParams {
    #[serde(default = "default_direction")]
    u: VectorRule,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PowerParams {
    #[serde(default = "default_direction")]
    u: VectorRule,
    p: u32,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum FormParam {
    Named(String),
    Matrix(Vec<Vec<f64>>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FormParams {
    #[serde(default)]
    q: Option<FormParam>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RadialParams {
    profile: RadialProfile,
}

fn default_direction() -> VectorRule {
    VectorRule::named("e1")
}

fn build_linear(params: &Value, d: usize) -> Result<Box<dyn Functional>> {
    let p: DirectionParams = parse_params("functional", params)?;
    Ok(Box::new(Linear {
        u: p.u.resolve(d, "functional.u")?,
    }))
}

fn build_power(params: &Value, d: usize) -> Result<Box<dyn Functional>> {
    let p: PowerParams = parse_params("functional", params)?;
    if p.p == 0 {
        return Err(Error::config("functional.p", "exponent must be >= 1"));
    }
    Ok(Box::new(Power {
        u: p.u.resolve(d, "functional.u")?,
        p: p.p,
    }))
}

fn build_quadratic(params: &Value, d: usize) -> Result<Box<dyn Functional>> {
    let p: FormParams = parse_params("functional", params)?;
    let f = match p.q {
        None => QuadraticForm::identity(d),
        Some(FormParam::Named(s)) if s == "identity" => QuadraticForm::identity(d),
        Some(FormParam::Named(s)) => {
            return Err(Error::config(
                "functional.q",
                format!("unknown form `{s}` (use \"identity\" or a matrix)"),
            ))
        }
        Some(FormParam::Matrix(rows)) => {
            let q = Matrix::from_rows(&rows)
                .map_err(|e| Error::config("functional.q", e.to_string()))?;
            if q.rows() != d {
                return Err(Error::config(
                    "functional.q",
                    format!("expected {d}x{d} matrix"),
                ));
            }
            QuadraticForm::new(q)?
        }
    };
    Ok(Box::new(f))
}

fn build_exp_linear(params: &Value, d: usize) -> Result<Box<dyn Functional>> {
    let p: DirectionParams = parse_params("functional", params)?;
    Ok(Box::new(ExpLinear {
        u: p.u.resolve(d, "functional.u")?,
    }))
}

fn build_radial(params: &Value, d: usize) -> Result<Box<dyn Functional>> {
    let p: RadialParams = parse_params("functional", params)?;
    Ok(Box::new(Radial {
        dim: d,
        profile: p.profile,
    }))
}

pub fn registry() -> Registry<FunctionalBuilder> {
    let mut r: Registry<FunctionalBuilder> = Registry::new("functional");
    r.register("linear", build_linear)
        .register("power", build_power)
        .register("quadratic_form", build_quadratic)
        .register("exp_linear", build_exp_linear)
        .register("radial", build_radial);
    r
}

pub fn build(
    registry: &Registry<FunctionalBuilder>,
    spec: &ComponentSpec,
    d: usize,
) -> Result<Box<dyn Functional>> {
    if d == 0 {
        return Err(Error::config("functional", "dimension must be >= 1"));
    }
    registry.get(&spec.kind)?(&spec.params, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use serde_json::json;

    fn pv(v: &[f64]) -> ParamVector {
        ParamVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn value_examples() {
        let lin = Linear { u: pv(&[1.0, 0.0]) };
        assert_eq!(lin.value(&pv(&[3.0, 0.0])), 3.0);
        let e = ExpLinear { u: pv(&[0.0, 0.0]) };
        assert_eq!(e.value(&pv(&[5.0, -2.0])), 1.0);
        let cube = Power { u: pv(&[1.0, 1.0]), p: 3 };
        assert_eq!(cube.value(&pv(&[1.0, 2.0])), 27.0);
    }

    #[test]
    fn grad_examples() {
        let lin = Linear { u: pv(&[0.3, -2.0]) };
        assert_eq!(lin.grad(&pv(&[9.0, 1.0])), pv(&[0.3, -2.0]));
        let q = QuadraticForm::identity(2);
        assert_eq!(q.grad(&pv(&[1.0, 2.0])), pv(&[2.0, 4.0]));
        let sq = Power { u: pv(&[1.0, 0.0]), p: 2 };
        assert_eq!(sq.grad(&pv(&[3.0, 5.0])), pv(&[6.0, 0.0]));
    }

    #[test]
    fn grad_check_examples() {
        let h = DEFAULT_STEP;
        let theta = pv(&[0.7, -1.3, 2.1]);
        let lin = Linear { u: pv(&[1.0, 2.0, -3.0]) };
        assert!(grad_check(&lin, &theta, h).unwrap() <= 1e-9);
        let e = ExpLinear { u: pv(&[0.5, -0.5, 1.0]) };
        assert!(grad_check(&e, &ParamVector::zeros(3), h).unwrap() <= 1e-7);
        let q = QuadraticForm::new(
            Matrix::from_rows(&[
                vec![2.0, 1.0, 0.0],
                vec![0.0, 1.0, -1.0],
                vec![0.5, 0.0, 3.0],
            ])
            .unwrap(),
        )
        .unwrap();
        assert!(grad_check(&q, &theta, h).unwrap() <= 1e-8);
        assert!(grad_check(&q, &theta, 0.0).is_err());
    }

    #[test]
    fn non_symmetric_form_gradient() {
        let q = QuadraticForm::new(Matrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap())
            .unwrap();
        // f = t0 * t1
        assert_eq!(q.value(&pv(&[2.0, 3.0])), 6.0);
        assert_eq!(q.grad(&pv(&[2.0, 3.0])), pv(&[3.0, 2.0]));
    }

    fn all_builtins(d: usize) -> Vec<Box<dyn Functional>> {
        let reg = registry();
        [
            json!({"type": "linear", "u": "ones_unit"}),
            json!({"type": "power", "u": "ones_unit", "p": 2}),
            json!({"type": "power", "u": "sin_unit", "p": 3}),
            json!({"type": "power", "u": "e1", "p": 4}),
            json!({"type": "quadratic_form"}),
            json!({"type": "exp_linear", "u": "sin_unit"}),
            json!({"type": "radial", "profile": "neg_exp"}),
            json!({"type": "radial", "profile": "log1p"}),
        ]
        .into_iter()
        .map(|v| build(&reg, &serde_json::from_value(v).unwrap(), d).unwrap())
        .collect()
    }

    #[test]
    fn builtins_pass_grad_check_on_random_points() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let d = 4;
        for f in all_builtins(d) {
            for _ in 0..100 {
                let raw: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                let r: f64 = rng.random_range(0.0..10.0);
                let theta = pv(&raw).normalized().scaled(r).unwrap();
                let err = grad_check(f.as_ref(), &theta, DEFAULT_STEP).unwrap();
                assert!(
                    err <= 1e-6,
                    "{} at {theta:?}: {err:e}",
                    f.name()
                );
                assert!(f.smoothness().is_infinite());
            }
        }
    }

    #[test]
    fn builder_rejects_bad_params() {
        let reg = registry();
        let bad = [
            json!({"type": "power", "p": 0}),
            json!({"type": "linear", "v": [1.0]}),
            json!({"type": "quadratic_form", "q": "diag"}),
            json!({"type": "radial", "profile": "cosine"}),
            json!({"type": "nonsense"}),
        ];
        for v in bad {
            let spec: ComponentSpec = serde_json::from_value(v.clone()).unwrap();
            assert!(build(&reg, &spec, 3).is_err(), "{v}");
        }
    }
}
