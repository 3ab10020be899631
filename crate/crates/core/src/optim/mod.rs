//! Optimizer state machines: SGD, AdaGrad, RMSProp, Adam, AMSGrad and CoBA.
//!
//! Every rule takes a projected step: the candidate point is mapped back onto
//! the feasible set under the metric the rule adapts (identity for SGD,
//! AdaGrad and RMSProp; `diag(√v + ε)` for Adam; `diag(√v̂ + ε)` for AMSGrad
//! and CoBA). The `+ ε` keeps the metric positive definite while a second
//! moment coordinate is still zero.

mod hyper;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use self::hyper::{Beta1Schedule, HyperParams, StepSizeSchedule};
use crate::cg::{cg_direction, gamma, CgContext, GammaKind};
use crate::error::{check_dims, Error, Result};
use crate::feasible::FeasibleSet;
use crate::scalar::Scalar;
use crate::vecmath::{DiagMetric, ParamVector};

/// Diagnostics from the most recent step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepInfo<T> {
    pub t: u64,
    pub alpha_t: T,
    pub beta1_t: T,
    /// γ_t for CoBA, zero for every other rule.
    pub gamma: T,
    /// Euclidean norm of the direction fed to the first moment.
    pub direction_norm: T,
}

/// Mutable per-run optimizer state. All moment vectors start at zero.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerState<T> {
    x: ParamVector<T>,
    m: ParamVector<T>,
    v: ParamVector<T>,
    v_hat: ParamVector<T>,
    d_prev: ParamVector<T>,
    g_prev: ParamVector<T>,
    grad_accum: ParamVector<T>,
    t: u64,
    last: StepInfo<T>,
}

impl<T: Scalar> OptimizerState<T> {
    pub fn new(x0: ParamVector<T>) -> Self {
        let n = x0.len();
        Self {
            x: x0,
            m: ParamVector::zeros(n),
            v: ParamVector::zeros(n),
            v_hat: ParamVector::zeros(n),
            d_prev: ParamVector::zeros(n),
            g_prev: ParamVector::zeros(n),
            grad_accum: ParamVector::zeros(n),
            t: 0,
            last: StepInfo::default(),
        }
    }

    pub fn x(&self) -> &ParamVector<T> {
        &self.x
    }
    pub fn first_moment(&self) -> &ParamVector<T> {
        &self.m
    }
    pub fn second_moment(&self) -> &ParamVector<T> {
        &self.v
    }
    /// Running coordinate-wise maximum of the second moment.
    pub fn max_second_moment(&self) -> &ParamVector<T> {
        &self.v_hat
    }
    /// Direction `d_{t}` of the last CoBA step (`d_0 = 0`).
    pub fn prev_direction(&self) -> &ParamVector<T> {
        &self.d_prev
    }
    pub fn prev_gradient(&self) -> &ParamVector<T> {
        &self.g_prev
    }
    pub fn grad_accum(&self) -> &ParamVector<T> {
        &self.grad_accum
    }
    /// Number of completed steps.
    pub fn t(&self) -> u64 {
        self.t
    }
    pub fn last_step(&self) -> &StepInfo<T> {
        &self.last
    }

    fn begin(&self, g: &ParamVector<T>) -> Result<u64> {
        check_dims(self.x.len(), g.len())?;
        Ok(self.t + 1)
    }
}

fn check_finite<T: Scalar>(name: &'static str, coords: &[T]) -> Result<()> {
    if coords.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(name))
    }
}

fn euclid<T: Scalar>(set: &FeasibleSet<T>, y: Vec<T>) -> Result<ParamVector<T>> {
    check_finite("iterate", &y)?;
    let n = y.len();
    set.project(&DiagMetric::identity(n), &ParamVector::from_vec_unchecked(y))
}

fn metric_project<T: Scalar>(set: &FeasibleSet<T>, denom: Vec<T>, y: Vec<T>) -> Result<ParamVector<T>> {
    check_finite("iterate", &y)?;
    check_finite("metric", &denom)?;
    let metric = DiagMetric::new(ParamVector::from_vec_unchecked(denom))?;
    set.project(&metric, &ParamVector::from_vec_unchecked(y))
}

/// `x_{t+1} = Π_F(x_t − α_t g_t)`.
pub fn sgd_step<'s, T: Scalar>(
    state: &'s mut OptimizerState<T>,
    hyper: &HyperParams<T>,
    g: &ParamVector<T>,
    set: &FeasibleSet<T>,
) -> Result<&'s ParamVector<T>> {
    let t = state.begin(g)?;
    let alpha_t = hyper.step.at(t);
    let y = state.x.iter().zip(g.iter()).map(|(&x, &gi)| x - alpha_t * gi).collect();
    state.x = euclid(set, y)?;
    state.t = t;
    state.last = StepInfo { t, alpha_t, beta1_t: T::zero(), gamma: T::zero(), direction_norm: g.norm() };
    Ok(&state.x)
}

fn safe_ratio<T: Scalar>(num: T, den: T) -> T {
    if den.is_zero() { T::zero() } else { num / den }
}

/// AdaGrad: accumulate `g̃` and divide by `√accum + ε`.
pub fn adagrad_step<'s, T: Scalar>(
    state: &'s mut OptimizerState<T>,
    hyper: &HyperParams<T>,
    g: &ParamVector<T>,
    set: &FeasibleSet<T>,
) -> Result<&'s ParamVector<T>> {
    let t = state.begin(g)?;
    let alpha_t = hyper.step.at(t);
    let accum: Vec<T> = state.grad_accum.iter().zip(g.iter()).map(|(&a, &gi)| a + gi * gi).collect();
    let y = state
        .x
        .iter()
        .zip(g.iter().zip(&accum))
        .map(|(&x, (&gi, &a))| x - alpha_t * safe_ratio(gi, a.sqrt() + hyper.eps))
        .collect();
    let x = euclid(set, y)?;
    check_finite("gradient accumulator", &accum)?;
    state.grad_accum = ParamVector::from_vec_unchecked(accum);
    state.x = x;
    state.t = t;
    state.last = StepInfo { t, alpha_t, beta1_t: T::zero(), gamma: T::zero(), direction_norm: g.norm() };
    Ok(&state.x)
}

/// RMSProp: `v ← ρ v + (1 − ρ) g̃`, step `α g / (√v + ε)`.
pub fn rmsprop_step<'s, T: Scalar>(
    state: &'s mut OptimizerState<T>,
    hyper: &HyperParams<T>,
    g: &ParamVector<T>,
    set: &FeasibleSet<T>,
) -> Result<&'s ParamVector<T>> {
    let t = state.begin(g)?;
    let alpha_t = hyper.step.at(t);
    let rho = hyper.rho;
    let v: Vec<T> = state
        .v
        .iter()
        .zip(g.iter())
        .map(|(&vi, &gi)| rho * vi + (T::one() - rho) * gi * gi)
        .collect();
    let y = state
        .x
        .iter()
        .zip(g.iter().zip(&v))
        .map(|(&x, (&gi, &vi))| x - alpha_t * safe_ratio(gi, vi.sqrt() + hyper.eps))
        .collect();
    let x = euclid(set, y)?;
    check_finite("second moment", &v)?;
    state.v = ParamVector::from_vec_unchecked(v);
    state.x = x;
    state.t = t;
    state.last = StepInfo { t, alpha_t, beta1_t: T::zero(), gamma: T::zero(), direction_norm: g.norm() };
    Ok(&state.x)
}

/// Adam without bias correction, projected under `diag(√v + ε)`.
pub fn adam_step<'s, T: Scalar>(
    state: &'s mut OptimizerState<T>,
    hyper: &HyperParams<T>,
    g: &ParamVector<T>,
    set: &FeasibleSet<T>,
) -> Result<&'s ParamVector<T>> {
    let t = state.begin(g)?;
    let alpha_t = hyper.step.at(t);
    let beta1 = hyper.beta1.beta1();
    let beta2 = hyper.beta2;
    let n = g.len();
    let mut m = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    let mut denom = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let gi = g[i];
        let mi = beta1 * state.m[i] + (T::one() - beta1) * gi;
        let vi = beta2 * state.v[i] + (T::one() - beta2) * (gi * gi);
        let di = vi.sqrt() + hyper.eps;
        y.push(state.x[i] - alpha_t * (mi / di));
        m.push(mi);
        v.push(vi);
        denom.push(di);
    }
    let x = metric_project(set, denom, y)?;
    check_finite("first moment", &m)?;
    state.m = ParamVector::from_vec_unchecked(m);
    state.v = ParamVector::from_vec_unchecked(v);
    state.x = x;
    state.t = t;
    state.last = StepInfo { t, alpha_t, beta1_t: beta1, gamma: T::zero(), direction_norm: g.norm() };
    Ok(&state.x)
}

/// Shared AMSGrad/CoBA tail: moments from `direction` and `g`, max accumulator,
/// projected step. Commits the new state.
fn max_moment_update<T: Scalar>(
    state: &mut OptimizerState<T>,
    hyper: &HyperParams<T>,
    direction: &ParamVector<T>,
    g: &ParamVector<T>,
    t: u64,
    set: &FeasibleSet<T>,
) -> Result<(T, T)> {
    let alpha_t = hyper.step.at(t);
    let beta1_t = hyper.beta1.at(t);
    let beta2 = hyper.beta2;
    let n = g.len();
    let mut m = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    let mut v_hat = Vec::with_capacity(n);
    let mut denom = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let gi = g[i];
        let mi = beta1_t * state.m[i] + (T::one() - beta1_t) * direction[i];
        let vi = beta2 * state.v[i] + (T::one() - beta2) * (gi * gi);
        let vhi = state.v_hat[i].max(vi);
        let di = vhi.sqrt() + hyper.eps;
        y.push(state.x[i] - alpha_t * (mi / di));
        m.push(mi);
        v.push(vi);
        v_hat.push(vhi);
        denom.push(di);
    }
    let x = metric_project(set, denom, y)?;
    check_finite("first moment", &m)?;
    state.m = ParamVector::from_vec_unchecked(m);
    state.v = ParamVector::from_vec_unchecked(v);
    state.v_hat = ParamVector::from_vec_unchecked(v_hat);
    state.x = x;
    state.t = t;
    Ok((alpha_t, beta1_t))
}

/// AMSGrad with `β_{1t}` and `α_t` schedules.
pub fn amsgrad_step<'s, T: Scalar>(
    state: &'s mut OptimizerState<T>,
    hyper: &HyperParams<T>,
    g: &ParamVector<T>,
    set: &FeasibleSet<T>,
) -> Result<&'s ParamVector<T>> {
    let t = state.begin(g)?;
    let (alpha_t, beta1_t) = max_moment_update(state, hyper, g, g, t, set)?;
    state.last = StepInfo { t, alpha_t, beta1_t, gamma: T::zero(), direction_norm: g.norm() };
    Ok(&state.x)
}

/// One CoBA iteration: γ_t, damped direction `d_t`, then the AMSGrad tail
/// with `d_t` in the first moment and the raw `g_t` in the second.
pub fn coba_step<'s, T: Scalar>(
    state: &'s mut OptimizerState<T>,
    hyper: &HyperParams<T>,
    g: &ParamVector<T>,
    set: &FeasibleSet<T>,
) -> Result<&'s ParamVector<T>> {
    let t = state.begin(g)?;
    let ctx = CgContext { g_curr: g, g_prev: &state.g_prev, d_prev: &state.d_prev, t };
    let gamma_t = gamma(hyper.gamma_kind, &ctx)?;
    let d = cg_direction(g, gamma_t, &state.d_prev, hyper.damping, hyper.damping_exponent, t)?;
    let (alpha_t, beta1_t) = max_moment_update(state, hyper, &d, g, t, set)?;
    state.last = StepInfo { t, alpha_t, beta1_t, gamma: gamma_t, direction_norm: d.norm() };
    state.g_prev = g.clone();
    state.d_prev = d;
    Ok(&state.x)
}

/// Update rule selector. CoBA reads its γ formula from [`HyperParams::gamma_kind`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Sgd,
    AdaGrad,
    RmsProp,
    Adam,
    AmsGrad,
    Coba,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Sgd => "sgd",
            Method::AdaGrad => "adagrad",
            Method::RmsProp => "rmsprop",
            Method::Adam => "adam",
            Method::AmsGrad => "amsgrad",
            Method::Coba => "coba",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parsed optimizer name: `sgd`, `adagrad`, `rmsprop`, `adam`, `amsgrad` or
/// `coba-{hs,fr,prp,dy,hz}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OptimizerName {
    pub method: Method,
    /// Short γ name for CoBA variants.
    pub gamma: Option<&'static str>,
}

impl OptimizerName {
    /// The ten optimizers compared in the benchmark roster.
    pub const ROSTER: [&'static str; 10] = [
        "sgd", "adagrad", "rmsprop", "adam", "amsgrad", "coba-hs", "coba-fr", "coba-prp", "coba-dy",
        "coba-hz",
    ];

    /// Resolves the CoBA γ kind, HZ taking `lambda`.
    pub fn gamma_kind<T: Scalar>(&self, lambda: T) -> Result<Option<GammaKind<T>>> {
        self.gamma.map(|g| GammaKind::parse_with_lambda(g, lambda)).transpose()
    }
}

impl fmt::Display for OptimizerName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.gamma {
            Some(g) => write!(f, "coba-{g}"),
            None => f.write_str(self.method.name()),
        }
    }
}

impl FromStr for OptimizerName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        let method = match lower.as_str() {
            "sgd" => Method::Sgd,
            "adagrad" => Method::AdaGrad,
            "rmsprop" => Method::RmsProp,
            "adam" => Method::Adam,
            "amsgrad" => Method::AmsGrad,
            _ => {
                let gamma = match lower.strip_prefix("coba-") {
                    Some("hs") => "hs",
                    Some("fr") => "fr",
                    Some("prp") => "prp",
                    Some("dy") => "dy",
                    Some("hz") => "hz",
                    _ => return Err(Error::Input(format!("unknown optimizer `{s}`"))),
                };
                return Ok(OptimizerName { method: Method::Coba, gamma: Some(gamma) });
            }
        };
        Ok(OptimizerName { method, gamma: None })
    }
}

/// An update rule bound to its hyperparameters and state.
#[derive(Clone, Debug)]
pub struct Optimizer<T> {
    method: Method,
    hyper: HyperParams<T>,
    state: OptimizerState<T>,
}

impl<T: Scalar> Optimizer<T> {
    /// Validates `hyper` (including `M > 0`, `a > 1`) and zero-initializes state at `x0`.
    pub fn new(method: Method, hyper: HyperParams<T>, x0: ParamVector<T>) -> Result<Self> {
        hyper.validate()?;
        Ok(Self { method, hyper, state: OptimizerState::new(x0) })
    }

    /// Admits the degenerate `M = 0` / `a ≤ 1` settings used by equivalence checks.
    pub fn new_relaxed(method: Method, hyper: HyperParams<T>, x0: ParamVector<T>) -> Result<Self> {
        hyper.validate_relaxed()?;
        Ok(Self { method, hyper, state: OptimizerState::new(x0) })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn hyper(&self) -> &HyperParams<T> {
        &self.hyper
    }

    pub fn state(&self) -> &OptimizerState<T> {
        &self.state
    }

    pub fn x(&self) -> &ParamVector<T> {
        self.state.x()
    }

    pub fn step(&mut self, g: &ParamVector<T>, set: &FeasibleSet<T>) -> Result<&ParamVector<T>> {
        let (state, hyper) = (&mut self.state, &self.hyper);
        match self.method {
            Method::Sgd => sgd_step(state, hyper, g, set),
            Method::AdaGrad => adagrad_step(state, hyper, g, set),
            Method::RmsProp => rmsprop_step(state, hyper, g, set),
            Method::Adam => adam_step(state, hyper, g, set),
            Method::AmsGrad => amsgrad_step(state, hyper, g, set),
            Method::Coba => coba_step(state, hyper, g, set),
        }
    }
}

#[cfg(test)]
mod tests;
