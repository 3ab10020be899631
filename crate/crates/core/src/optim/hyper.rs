use serde::{Deserialize, Serialize};

use crate::cg::GammaKind;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Step size sequence `α_t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepSizeSchedule<T> {
    /// `α_t = α`.
    Constant { alpha: T },
    /// `α_t = α / √t`.
    DiminishingSqrt { alpha: T },
}

impl<T: Scalar> StepSizeSchedule<T> {
    pub fn alpha(&self) -> T {
        match *self {
            StepSizeSchedule::Constant { alpha } | StepSizeSchedule::DiminishingSqrt { alpha } => {
                alpha
            }
        }
    }

    pub fn at(&self, t: u64) -> T {
        match *self {
            StepSizeSchedule::Constant { alpha } => alpha,
            StepSizeSchedule::DiminishingSqrt { alpha } => alpha / T::lit(t as f64).sqrt(),
        }
    }

    pub fn is_diminishing_sqrt(&self) -> bool {
        matches!(self, StepSizeSchedule::DiminishingSqrt { .. })
    }
}

/// First-moment weight sequence `β_{1t}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Beta1Schedule<T> {
    Constant { beta1: T },
    /// `β_{1t} = β₁ · decay^{t−1}`.
    GeometricDecay { beta1: T, decay: T },
}

impl<T: Scalar> Beta1Schedule<T> {
    /// The cap `β₁ = β_{11}`.
    pub fn beta1(&self) -> T {
        match *self {
            Beta1Schedule::Constant { beta1 } | Beta1Schedule::GeometricDecay { beta1, .. } => beta1,
        }
    }

    pub fn at(&self, t: u64) -> T {
        match *self {
            Beta1Schedule::Constant { beta1 } => beta1,
            Beta1Schedule::GeometricDecay { beta1, decay } => {
                beta1 * decay.powf(T::lit(t.saturating_sub(1) as f64))
            }
        }
    }
}

/// Hyperparameters shared by all optimizers; each method reads what it needs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperParams<T> {
    pub step: StepSizeSchedule<T>,
    pub beta1: Beta1Schedule<T>,
    pub beta2: T,
    pub eps: T,
    /// CoBA damping scale `M`.
    pub damping: T,
    /// CoBA damping exponent `a`.
    pub damping_exponent: T,
    pub gamma_kind: GammaKind<T>,
    /// RMSProp smoothing constant.
    pub rho: T,
}

impl<T: Scalar> Default for HyperParams<T> {
    /// β₁ = 0.9, β₂ = 0.999, λ = 2, M = 1e-4, a = 1 + 1e-5, constant α = 1e-2.
    fn default() -> Self {
        Self {
            step: StepSizeSchedule::Constant { alpha: T::lit(1e-2) },
            beta1: Beta1Schedule::Constant { beta1: T::lit(0.9) },
            beta2: T::lit(0.999),
            eps: T::lit(1e-8),
            damping: T::lit(1e-4),
            damping_exponent: T::lit(1.0 + 1e-5),
            gamma_kind: GammaKind::Hz { lambda: T::lit(2.0) },
            rho: T::lit(0.99),
        }
    }
}

fn open_unit<T: Scalar>(name: &str, x: T) -> Result<()> {
    if x > T::zero() && x < T::one() {
        Ok(())
    } else {
        Err(Error::InvalidHyper(format!("{name} must lie in (0, 1), got {x}")))
    }
}

impl<T: Scalar> HyperParams<T> {
    pub fn with_step(mut self, step: StepSizeSchedule<T>) -> Self {
        self.step = step;
        self
    }

    pub fn with_gamma(mut self, kind: GammaKind<T>) -> Self {
        self.gamma_kind = kind;
        self
    }

    pub fn with_damping(mut self, scale: T, exponent: T) -> Self {
        self.damping = scale;
        self.damping_exponent = exponent;
        self
    }

    /// `μ = β₁ / √β₂`, using the β₁ cap.
    pub fn mu(&self) -> T {
        self.beta1.beta1() / self.beta2.sqrt()
    }

    /// Checks every range constraint, including `M > 0` and `a > 1`.
    pub fn validate(&self) -> Result<()> {
        self.validate_relaxed()?;
        if !(self.damping > T::zero()) {
            return Err(Error::InvalidHyper(format!("M must be positive, got {}", self.damping)));
        }
        if !(self.damping_exponent > T::one()) {
            return Err(Error::InvalidHyper(format!(
                "a must exceed 1, got {}",
                self.damping_exponent
            )));
        }
        Ok(())
    }

    /// Like [`validate`](Self::validate) but admits `M = 0` and `a ≥ 0`
    /// (degenerate settings used by equivalence checks).
    pub fn validate_relaxed(&self) -> Result<()> {
        let all = [
            self.step.alpha(),
            self.beta1.beta1(),
            self.beta2,
            self.eps,
            self.damping,
            self.damping_exponent,
            self.rho,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidHyper("non-finite hyperparameter".into()));
        }
        if !(self.step.alpha() > T::zero()) {
            return Err(Error::InvalidHyper(format!(
                "alpha must be positive, got {}",
                self.step.alpha()
            )));
        }
        let beta1 = self.beta1.beta1();
        if !(beta1 >= T::zero() && beta1 < T::one()) {
            return Err(Error::InvalidHyper(format!("beta1 must lie in [0, 1), got {beta1}")));
        }
        if let Beta1Schedule::GeometricDecay { decay, .. } = self.beta1 {
            if !(decay > T::zero() && decay <= T::one()) {
                return Err(Error::InvalidHyper(format!("beta1 decay must lie in (0, 1], got {decay}")));
            }
        }
        open_unit("beta2", self.beta2)?;
        open_unit("rho", self.rho)?;
        if !(self.eps > T::zero()) {
            return Err(Error::InvalidHyper(format!("eps must be positive, got {}", self.eps)));
        }
        if self.damping < T::zero() || self.damping_exponent < T::zero() {
            return Err(Error::InvalidHyper("M and a must be nonnegative".into()));
        }
        self.gamma_kind.validate()
    }

    /// Extra hypotheses needed for the regret bound: `α_t = α/√t`, `μ < 1`.
    pub fn validate_for_theory(&self) -> Result<()> {
        if !self.step.is_diminishing_sqrt() {
            return Err(Error::Precondition(
                "regret bound requires the alpha/sqrt(t) step schedule".into(),
            ));
        }
        if !(self.mu() < T::one()) {
            return Err(Error::Precondition(format!(
                "beta1/sqrt(beta2) must be below 1, got {}",
                self.mu()
            )));
        }
        Ok(())
    }
}
