//! Regret accounting and numerical checks of the CoBA regret bound.
//!
//! A [`TheoryTrace`] captures, per step, everything the bound and its two
//! supporting lemmas read: γ_t, g_t, d_t, m_t, v̂_t, α_t, β_{1t} and the loss
//! of the iterate and of the comparator. The checks are pure functions over a
//! finished trace.
//!
//! Coordinates whose v̂ is still zero contribute nothing: their m is zero as
//! well, so the left-hand sides skip them instead of dividing 0 by 0.

use serde::{Deserialize, Serialize};

use crate::cg::damping;
use crate::error::{Error, Result};
use crate::feasible::Diameter;
use crate::optim::{HyperParams, Optimizer};
use crate::scalar::Scalar;
use crate::vecmath::ParamVector;

/// Relative slack granted to floating-point summation in every inequality.
pub const RELATIVE_SLACK: f64 = 1e-9;
/// Absolute slack on `‖d_t‖ ≤ Ḡ∞`.
pub const DIRECTION_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct TheoryStep<T> {
    pub gamma: T,
    pub gradient: ParamVector<T>,
    pub direction: ParamVector<T>,
    pub first_moment: ParamVector<T>,
    pub max_second_moment: ParamVector<T>,
    pub alpha_t: T,
    pub beta1_t: T,
    /// f_t(x_t).
    pub loss: T,
    /// f_t(x*), filled once the comparator is known.
    pub comparator_loss: T,
}

/// Per-step record of one instrumented run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TheoryTrace<T> {
    steps: Vec<TheoryStep<T>>,
}

impl<T: Scalar> TheoryTrace<T> {
    pub fn new() -> Self {
        Self { steps: Vec::new() }
    }

    pub fn from_steps(steps: Vec<TheoryStep<T>>) -> Self {
        Self { steps }
    }

    pub fn steps(&self) -> &[TheoryStep<T>] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Appends the step just taken by `opt`, whose gradient was `g` and whose
    /// pre-step loss was `loss`. Non-CoBA rules record `d_t = g_t`.
    pub fn record(&mut self, opt: &Optimizer<T>, g: &ParamVector<T>, loss: T) {
        let state = opt.state();
        let info = state.last_step();
        let direction = match opt.method() {
            crate::optim::Method::Coba => state.prev_direction().clone(),
            _ => g.clone(),
        };
        self.steps.push(TheoryStep {
            gamma: info.gamma,
            gradient: g.clone(),
            direction,
            first_moment: state.first_moment().clone(),
            max_second_moment: state.max_second_moment().clone(),
            alpha_t: info.alpha_t,
            beta1_t: info.beta1_t,
            loss,
            comparator_loss: T::zero(),
        });
    }

    /// Fills f_t(x*) for every step.
    pub fn set_comparator_losses(&mut self, losses: &[T]) -> Result<()> {
        crate::error::check_dims(self.steps.len(), losses.len())?;
        for (s, &l) in self.steps.iter_mut().zip(losses) {
            s.comparator_loss = l;
        }
        Ok(())
    }

    pub fn gammas(&self) -> Vec<T> {
        self.steps.iter().map(|s| s.gamma).collect()
    }

    fn dim(&self) -> usize {
        self.steps.first().map_or(0, |s| s.gradient.len())
    }
}

/// `R(T) = Σ_t f_t(x_t) − f_t(x*)`.
pub fn regret<T: Scalar>(trace: &TheoryTrace<T>) -> T {
    trace.steps.iter().map(|s| s.loss - s.comparator_loss).sum()
}

/// Smallest `t₀ ≥ 1` with `(M / t^a) Γ ≤ 1/2`, where Γ is the largest |γ_t| seen.
pub fn compute_t0<T: Scalar>(gammas: &[T], scale: T, exponent: T) -> Result<u64> {
    if gammas.is_empty() {
        return Err(Error::Input("t0 needs at least one gamma".into()));
    }
    if gammas.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("gamma sequence"));
    }
    let sup = gammas.iter().fold(T::zero(), |acc, g| acc.max(g.abs()));
    let half = T::lit(0.5);
    let ok = |t: u64| damping(scale, exponent, t) * sup <= half;
    if ok(1) {
        return Ok(1);
    }
    if !(exponent > T::zero()) {
        return Err(Error::Input("damping never falls below 1/2 with a <= 0".into()));
    }
    // (2 M Γ)^{1/a}, then settle the rounding by direct checks.
    let guess = (T::lit(2.0) * scale * sup).powf(exponent.recip()).to_f64_lossy();
    let mut t0 = guess.ceil().clamp(1.0, u64::MAX as f64 / 2.0) as u64;
    while !ok(t0) {
        t0 += 1;
    }
    while t0 > 1 && ok(t0 - 1) {
        t0 -= 1;
    }
    Ok(t0)
}

/// Ingredients of the direction bound `Ḡ∞ = max{2G, max_{t<t₀} ‖d_t‖}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionBound<T> {
    /// Gradient norm bound `G` (Euclidean, see [`direction_bound`]).
    pub g_inf: T,
    pub t0: u64,
    pub gbar_inf: T,
}

/// Builds `Ḡ∞` from a Euclidean gradient bound `g_inf` and the trace's γ.
pub fn direction_bound<T: Scalar>(
    trace: &TheoryTrace<T>,
    hyper: &HyperParams<T>,
    g_inf: T,
) -> Result<DirectionBound<T>> {
    let t0 = compute_t0(&trace.gammas(), hyper.damping, hyper.damping_exponent)?;
    Ok(DirectionBound { g_inf, t0, gbar_inf: gbar(trace, g_inf, t0) })
}

fn gbar<T: Scalar>(trace: &TheoryTrace<T>, g_inf: T, t0: u64) -> T {
    let early = trace
        .steps
        .iter()
        .take(t0.saturating_sub(1) as usize)
        .fold(T::zero(), |acc, s| acc.max(s.direction.norm()));
    (g_inf + g_inf).max(early)
}

/// True iff every `‖d_t‖ ≤ Ḡ∞ + 1e-9`.
pub fn check_direction_bound<T: Scalar>(trace: &TheoryTrace<T>, g_inf: T, t0: u64) -> bool {
    let limit = gbar(trace, g_inf, t0) + T::lit(DIRECTION_SLACK);
    trace.steps.iter().all(|s| s.direction.norm() <= limit)
}

fn within<T: Scalar>(lhs: T, rhs: T) -> bool {
    lhs <= rhs + T::lit(RELATIVE_SLACK) * rhs.abs()
}

/// `Σ_i √(Σ_t x_{t,i}²)` over the chosen per-step vector.
fn column_root_sum<T: Scalar>(
    trace: &TheoryTrace<T>,
    pick: impl Fn(&TheoryStep<T>) -> &ParamVector<T>,
) -> T {
    let mut acc = vec![T::zero(); trace.dim()];
    for s in &trace.steps {
        for (a, &x) in acc.iter_mut().zip(pick(s).iter()) {
            *a = *a + x * x;
        }
    }
    acc.into_iter().map(|a| a.sqrt()).sum()
}

fn log_factor<T: Scalar>(steps: usize) -> T {
    (T::one() + T::lit(steps as f64).ln()).sqrt()
}

/// Both sides of the weighted moment-sum inequality for lag `l`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentSum<T> {
    pub lag: usize,
    pub lhs: T,
    pub rhs: T,
    pub holds: bool,
}

/// Evaluates `Σ_{t=l+1}^T α_t Σ_i m²_{t−l,i}/√v̂_{t,i}` against
/// `α √(1+log T) / ((1−β₁)(1−μ)√(1−β₂)) · Σ_i √(Σ_t d²_{t,i})`.
///
/// Traces shorter than two steps hold vacuously.
pub fn moment_sum<T: Scalar>(
    trace: &TheoryTrace<T>,
    hyper: &HyperParams<T>,
    lag: usize,
) -> Result<MomentSum<T>> {
    hyper.validate_for_theory()?;
    let horizon = trace.len();
    if horizon < 2 {
        return Ok(MomentSum { lag, lhs: T::zero(), rhs: T::zero(), holds: true });
    }
    if lag > horizon - 2 {
        return Err(Error::Input(format!("lag {lag} exceeds T - 2 = {}", horizon - 2)));
    }
    let steps = &trace.steps;
    let mut lhs = T::zero();
    // Step t (1-based) lives at index t - 1.
    for t in (lag + 1)..=horizon {
        let m = &steps[t - lag - 1].first_moment;
        let vh = &steps[t - 1].max_second_moment;
        let inner: T = m
            .iter()
            .zip(vh.iter())
            .filter(|(_, &v)| v > T::zero())
            .map(|(&mi, &v)| mi * mi / v.sqrt())
            .sum();
        lhs = lhs + steps[t - 1].alpha_t * inner;
    }
    let one = T::one();
    let beta1 = hyper.beta1.beta1();
    let coef = hyper.step.alpha() * log_factor::<T>(horizon)
        / ((one - beta1) * (one - hyper.mu()) * (one - hyper.beta2).sqrt());
    let rhs = coef * column_root_sum(trace, |s| &s.direction);
    Ok(MomentSum { lag, lhs, rhs, holds: within(lhs, rhs) })
}

/// Boolean form of [`moment_sum`].
pub fn check_moment_sum<T: Scalar>(
    trace: &TheoryTrace<T>,
    hyper: &HyperParams<T>,
    lag: usize,
) -> Result<bool> {
    moment_sum(trace, hyper, lag).map(|m| m.holds)
}

/// The regret bound split into its summands.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport<T> {
    pub regret: T,
    pub term1: T,
    pub term2: T,
    pub term3: T,
    pub term4: T,
    /// AMSGrad's bound: terms 1 and 2 coincide, the third uses g instead of d.
    pub amsgrad_term1: T,
    pub amsgrad_term2: T,
    pub amsgrad_term3: T,
    pub t0: u64,
    pub g_inf: T,
    pub gbar_inf: T,
    pub holds: bool,
}

impl<T: Scalar> BoundReport<T> {
    pub fn total(&self) -> T {
        self.term1 + self.term2 + self.term3 + self.term4
    }

    pub fn amsgrad_total(&self) -> T {
        self.amsgrad_term1 + self.amsgrad_term2 + self.amsgrad_term3
    }
}

/// Evaluates the four-term regret bound on `trace`.
pub fn theorem1_bound<T: Scalar>(
    trace: &TheoryTrace<T>,
    hyper: &HyperParams<T>,
    diameter: Diameter<T>,
    direction: DirectionBound<T>,
) -> Result<BoundReport<T>> {
    hyper.validate_for_theory()?;
    let d_inf = diameter
        .bounded()
        .ok_or_else(|| Error::Precondition("regret bound needs a bounded feasible set".into()))?;
    if trace.is_empty() {
        return Err(Error::Input("empty trace".into()));
    }
    let one = T::one();
    let two = T::lit(2.0);
    let horizon = trace.len();
    let alpha = hyper.step.alpha();
    let beta1 = hyper.beta1.beta1();
    let d_sq = d_inf * d_inf;

    let root_sum = |s: &TheoryStep<T>| s.max_second_moment.iter().map(|v| v.sqrt()).sum::<T>();
    let last = trace.steps.last().expect("nonempty");
    let term1 = d_sq * T::lit(horizon as f64).sqrt() / (alpha * (one - beta1)) * root_sum(last);
    let term2 = d_sq / (two * (one - beta1))
        * trace
            .steps
            .iter()
            .map(|s| s.beta1_t / s.alpha_t * root_sum(s))
            .sum::<T>();
    let coef3 = alpha * log_factor::<T>(horizon)
        / ((one - beta1) * (one - beta1) * (one - hyper.mu()) * (one - hyper.beta2).sqrt());
    let term3 = coef3 * column_root_sum(trace, |s| &s.direction);
    let gamma_sum: T = trace
        .steps
        .iter()
        .enumerate()
        .map(|(i, s)| s.gamma.abs() / T::lit((i + 1) as f64).powf(hyper.damping_exponent))
        .sum();
    let term4 = d_inf * direction.gbar_inf * gamma_sum;
    let amsgrad_term3 = coef3 * column_root_sum(trace, |s| &s.gradient);

    let r = regret(trace);
    let total = term1 + term2 + term3 + term4;
    Ok(BoundReport {
        regret: r,
        term1,
        term2,
        term3,
        term4,
        amsgrad_term1: term1,
        amsgrad_term2: term2,
        amsgrad_term3,
        t0: direction.t0,
        g_inf: direction.g_inf,
        gbar_inf: direction.gbar_inf,
        holds: within(r, total),
    })
}

/// Everything checked on one instrumented convex run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport<T> {
    pub bound: BoundReport<T>,
    pub direction_bound_holds: bool,
    pub moment_sums: Vec<MomentSum<T>>,
    /// Largest observed ‖g_t‖∞.
    pub observed_grad_inf: T,
    /// Analytic ℓ∞ gradient bound supplied by the problem.
    pub grad_inf_oracle: T,
    pub gradient_oracle_holds: bool,
}

impl<T: Scalar> TheoryReport<T> {
    pub fn all_hold(&self) -> bool {
        self.bound.holds
            && self.direction_bound_holds
            && self.gradient_oracle_holds
            && self.moment_sums.iter().all(|m| m.holds)
    }
}

/// Runs every check on a finished trace.
///
/// `grad_inf_oracle` is the analytic `sup ‖∇f_t‖∞` over the feasible set; the
/// direction lemma works in the Euclidean norm, so it is scaled by `√N`.
pub fn verify<T: Scalar>(
    trace: &TheoryTrace<T>,
    hyper: &HyperParams<T>,
    diameter: Diameter<T>,
    grad_inf_oracle: T,
    lags: &[usize],
) -> Result<TheoryReport<T>> {
    let n = T::lit(trace.dim() as f64);
    let g_euclid = grad_inf_oracle * n.sqrt();
    let direction = direction_bound(trace, hyper, g_euclid)?;
    let bound = theorem1_bound(trace, hyper, diameter, direction)?;
    let horizon = trace.len();
    let moment_sums = lags
        .iter()
        .filter(|&&l| horizon < 2 || l + 2 <= horizon)
        .map(|&l| moment_sum(trace, hyper, l))
        .collect::<Result<Vec<_>>>()?;
    let observed = trace.steps.iter().fold(T::zero(), |acc, s| {
        acc.max(crate::vecmath::norm_inf(&s.gradient))
    });
    Ok(TheoryReport {
        bound,
        direction_bound_holds: check_direction_bound(trace, g_euclid, direction.t0),
        moment_sums,
        observed_grad_inf: observed,
        grad_inf_oracle,
        gradient_oracle_holds: observed <= grad_inf_oracle,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cg::GammaKind;
    use crate::optim::{Beta1Schedule, StepSizeSchedule};

    fn v(c: &[f64]) -> ParamVector<f64> {
        ParamVector::from_f64(c).unwrap()
    }

    fn step(gamma: f64, g: &[f64], d: &[f64], m: &[f64], vh: &[f64], alpha_t: f64, beta1_t: f64) -> TheoryStep<f64> {
        TheoryStep {
            gamma,
            gradient: v(g),
            direction: v(d),
            first_moment: v(m),
            max_second_moment: v(vh),
            alpha_t,
            beta1_t,
            loss: 0.0,
            comparator_loss: 0.0,
        }
    }

    fn theory_hyper(alpha: f64, beta1: f64, beta2: f64) -> HyperParams<f64> {
        HyperParams {
            step: StepSizeSchedule::DiminishingSqrt { alpha },
            beta1: Beta1Schedule::Constant { beta1 },
            beta2,
            ..HyperParams::default()
        }
    }

    #[test]
    fn regret_examples() {
        let mut s = step(0.0, &[0.0], &[0.0], &[0.0], &[0.0], 1.0, 0.0);
        s.loss = 0.3;
        s.comparator_loss = 0.3;
        assert_eq!(regret(&TheoryTrace::from_steps(vec![s.clone(), s.clone()])), 0.0);
        let mut a = s.clone();
        a.loss = 0.8;
        let mut b = s;
        b.loss = 0.55;
        assert_eq!(regret(&TheoryTrace::from_steps(vec![a, b])), 0.75);
    }

    #[test]
    fn t0_examples() {
        assert_eq!(compute_t0(&[2.0, -1.0], 1e-4, 1.0 + 1e-5).unwrap(), 1);
        assert_eq!(compute_t0(&[1.0], 10.0, 2.0).unwrap(), 5);
        assert_eq!(compute_t0(&[0.0, 0.0], 10.0, 2.0).unwrap(), 1);
        assert!(compute_t0::<f64>(&[], 1.0, 2.0).is_err());
    }

    #[test]
    fn t0_matches_linear_scan() {
        for &(m, a, g) in &[(10.0, 2.0, 1.0), (3.0, 1.5, 7.0), (1e3, 1.00001, 0.9), (0.7, 3.0, 100.0)] {
            let expected = (1u64..).find(|&t| m / (t as f64).powf(a) * g <= 0.5).unwrap();
            assert_eq!(compute_t0(&[g], m, a).unwrap(), expected, "M={m} a={a} Γ={g}");
        }
    }

    #[test]
    fn bound_single_step_example() {
        let trace = TheoryTrace::from_steps(vec![step(0.0, &[1.0], &[1.0], &[1.0], &[1.0], 1.0, 0.0)]);
        let h = theory_hyper(1.0, 0.0, 0.5);
        let dir = DirectionBound { g_inf: 1.0, t0: 1, gbar_inf: 2.0 };
        let r = theorem1_bound(&trace, &h, Diameter::Bounded(1.0), dir).unwrap();
        assert!((r.term1 - 1.0).abs() < 1e-15);
        assert_eq!(r.term2, 0.0);
        assert!((r.term3 - std::f64::consts::SQRT_2).abs() < 1e-15);
        assert_eq!(r.term4, 0.0);
        assert!((r.total() - (1.0 + std::f64::consts::SQRT_2)).abs() < 1e-15);
        assert!(r.holds);
    }

    #[test]
    fn bound_preconditions() {
        let trace = TheoryTrace::from_steps(vec![step(0.0, &[1.0], &[1.0], &[1.0], &[1.0], 1.0, 0.0)]);
        let dir = DirectionBound { g_inf: 1.0, t0: 1, gbar_inf: 2.0 };
        let h = theory_hyper(1.0, 0.0, 0.5);
        assert!(matches!(theorem1_bound(&trace, &h, Diameter::Unbounded, dir), Err(Error::Precondition(_))));
        let h = theory_hyper(1.0, 0.9, 0.5);
        assert!(matches!(theorem1_bound(&trace, &h, Diameter::Bounded(1.0), dir), Err(Error::Precondition(_))));
        let h = HyperParams::default();
        assert!(matches!(moment_sum(&trace, &h, 0), Err(Error::Precondition(_))));
    }

    #[test]
    fn moment_sum_edge_cases() {
        let h = theory_hyper(0.1, 0.9, 0.999);
        let one = TheoryTrace::from_steps(vec![step(0.0, &[1.0], &[1.0], &[0.1], &[0.001], 0.1, 0.9)]);
        assert!(check_moment_sum(&one, &h, 0).unwrap());
        let zero = step(0.0, &[0.0, 0.0], &[0.0, 0.0], &[0.0, 0.0], &[0.0, 0.0], 0.1, 0.9);
        let zeros = TheoryTrace::from_steps(vec![zero.clone(), zero.clone(), zero]);
        let ms = moment_sum(&zeros, &h, 1).unwrap();
        assert_eq!((ms.lhs, ms.rhs, ms.holds), (0.0, 0.0, true));
        assert!(moment_sum(&zeros, &h, 2).is_err());
    }

    #[test]
    fn direction_bound_absorbs_early_steps() {
        let big = step(0.0, &[1.0], &[50.0], &[0.0], &[1.0], 1.0, 0.9);
        let small = step(0.0, &[1.0], &[1.5], &[0.0], &[1.0], 1.0, 0.9);
        let trace = TheoryTrace::from_steps(vec![big, small]);
        assert!(!check_direction_bound(&trace, 1.0, 1));
        assert!(check_direction_bound(&trace, 1.0, 2));
    }

    #[test]
    fn zero_gamma_means_zero_fourth_term() {
        let h = theory_hyper(0.1, 0.9, 0.999).with_gamma(GammaKind::Fr);
        let s = step(0.0, &[0.5, -0.5], &[0.5, -0.5], &[0.05, -0.05], &[2.5e-4, 2.5e-4], 0.1, 0.9);
        let trace = TheoryTrace::from_steps(vec![s.clone(), s]);
        let dir = direction_bound(&trace, &h, 1.0).unwrap();
        let r = theorem1_bound(&trace, &h, Diameter::Bounded(2.0), dir).unwrap();
        assert_eq!(r.term4, 0.0);
        assert_eq!(r.total(), r.amsgrad_total());
    }
}
