//! Conjugate gradient update parameters and the damped CoBA direction.
//!
//! The formulas are fed the stochastic gradients `g_t`, `g_{t-1}` and the
//! optimizer's own previous direction `d_{t-1}`, with `y_t = g_t - g_{t-1}`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::scalar::Scalar;
use crate::vecmath::{dot, ParamVector};

/// Relative threshold under which a denominator counts as singular.
pub const SINGULAR_GUARD: f64 = 1e-12;

/// Which conjugate gradient update parameter to use.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GammaKind<T> {
    /// Hestenes–Stiefel.
    Hs,
    /// Fletcher–Reeves.
    Fr,
    /// Polak–Ribière–Polyak.
    Prp,
    /// Dai–Yuan.
    Dy,
    /// Hager–Zhang; requires `lambda > 1/4`.
    Hz { lambda: T },
}

impl<T: Scalar> GammaKind<T> {
    pub fn hager_zhang(lambda: T) -> Result<Self> {
        if lambda.is_finite() && lambda > T::lit(0.25) {
            Ok(GammaKind::Hz { lambda })
        } else {
            Err(Error::InvalidHyper(format!(
                "Hager-Zhang lambda must exceed 1/4, got {lambda}"
            )))
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            GammaKind::Hz { lambda } => Self::hager_zhang(lambda).map(|_| ()),
            _ => Ok(()),
        }
    }

    pub fn short_name(&self) -> &'static str {
        match self {
            GammaKind::Hs => "hs",
            GammaKind::Fr => "fr",
            GammaKind::Prp => "prp",
            GammaKind::Dy => "dy",
            GammaKind::Hz { .. } => "hz",
        }
    }

    /// The five kinds, HZ with the given `lambda`.
    pub fn all(lambda: T) -> [GammaKind<T>; 5] {
        [
            GammaKind::Hs,
            GammaKind::Fr,
            GammaKind::Prp,
            GammaKind::Dy,
            GammaKind::Hz { lambda },
        ]
    }

    /// Parses `hs|fr|prp|dy|hz`; HZ takes `lambda`.
    pub fn parse_with_lambda(name: &str, lambda: T) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "hs" => Ok(GammaKind::Hs),
            "fr" => Ok(GammaKind::Fr),
            "prp" => Ok(GammaKind::Prp),
            "dy" => Ok(GammaKind::Dy),
            "hz" => Self::hager_zhang(lambda),
            other => Err(Error::Input(format!("unknown gamma kind `{other}`"))),
        }
    }
}

impl<T: Scalar> fmt::Display for GammaKind<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.short_name().to_ascii_uppercase())
    }
}

impl<T: Scalar> FromStr for GammaKind<T> {
    type Err = Error;

    /// Parses the short name; HZ gets `lambda = 2`.
    fn from_str(s: &str) -> Result<Self> {
        Self::parse_with_lambda(s, T::lit(2.0))
    }
}

/// Inputs to a γ evaluation at step `t`.
#[derive(Clone, Copy, Debug)]
pub struct CgContext<'a, T> {
    pub g_curr: &'a ParamVector<T>,
    pub g_prev: &'a ParamVector<T>,
    pub d_prev: &'a ParamVector<T>,
    pub t: u64,
}

fn singular<T: Scalar>(denominator: T, numerator: T) -> bool {
    denominator.abs() < T::lit(SINGULAR_GUARD) * (T::one() + numerator.abs())
}

/// Conjugate gradient update parameter γ_t.
///
/// Returns zero at `t = 1` and whenever a denominator is singular relative to
/// its numerator, so the caller falls back to the raw gradient.
pub fn gamma<T: Scalar>(kind: GammaKind<T>, ctx: &CgContext<'_, T>) -> Result<T> {
    let (g, gp, dp) = (ctx.g_curr, ctx.g_prev, ctx.d_prev);
    check_dims(g.len(), gp.len())?;
    check_dims(g.len(), dp.len())?;
    if ctx.t <= 1 {
        return Ok(T::zero());
    }

    let (g, gp, dp) = (g.as_slice(), gp.as_slice(), dp.as_slice());
    let y: Vec<T> = g.iter().zip(gp).map(|(&a, &b)| a - b).collect();
    let g_y = dot(g, &y);
    let d_y = dot(dp, &y);
    let g_sq = dot(g, g);
    let gp_sq = dot(gp, gp);

    let ratio = |num: T, den: T| if singular(den, num) { T::zero() } else { num / den };
    let value = match kind {
        GammaKind::Hs => ratio(g_y, d_y),
        GammaKind::Fr => ratio(g_sq, gp_sq),
        GammaKind::Prp => ratio(g_y, gp_sq),
        GammaKind::Dy => ratio(g_sq, d_y),
        GammaKind::Hz { lambda } => {
            let correction = lambda * dot(&y, &y) * dot(g, dp);
            let d_y_sq = d_y * d_y;
            if singular(d_y, g_y) || singular(d_y_sq, correction) {
                T::zero()
            } else {
                g_y / d_y - correction / d_y_sq
            }
        }
    };
    Ok(if value.is_finite() { value } else { T::zero() })
}

/// Damping coefficient `M / t^a`.
pub fn damping<T: Scalar>(scale: T, exponent: T, t: u64) -> T {
    scale / T::lit(t as f64).powf(exponent)
}

/// `d_t = g_t − (M / t^a) γ_t d_{t−1}`.
pub fn cg_direction<T: Scalar>(
    g: &ParamVector<T>,
    gamma_t: T,
    d_prev: &ParamVector<T>,
    scale: T,
    exponent: T,
    t: u64,
) -> Result<ParamVector<T>> {
    check_dims(g.len(), d_prev.len())?;
    if !(gamma_t.is_finite() && scale.is_finite() && exponent.is_finite()) {
        return Err(Error::NonFinite("conjugate direction inputs"));
    }
    if t == 0 {
        return Err(Error::Input("step counter starts at 1".into()));
    }
    let coef = damping(scale, exponent, t) * gamma_t;
    if coef.is_zero() {
        return Ok(g.clone());
    }
    ParamVector::new(
        g.iter()
            .zip(d_prev.iter())
            .map(|(&gi, &di)| gi - coef * di)
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> ParamVector<f64> {
        ParamVector::from_f64(c).unwrap()
    }

    fn fixture() -> (ParamVector<f64>, ParamVector<f64>, ParamVector<f64>) {
        (v(&[1.0, 1.0]), v(&[1.0, 0.0]), v(&[0.0, -1.0]))
    }

    #[test]
    fn first_step_is_zero_for_every_kind() {
        let (g, gp, dp) = fixture();
        let ctx = CgContext { g_curr: &g, g_prev: &gp, d_prev: &dp, t: 1 };
        for kind in GammaKind::all(2.0) {
            assert_eq!(gamma(kind, &ctx).unwrap(), 0.0);
        }
    }

    #[test]
    fn fletcher_reeves_of_repeated_gradient_is_one() {
        let g = v(&[0.3, -2.0, 1.5]);
        let d = v(&[1.0, 1.0, 1.0]);
        let ctx = CgContext { g_curr: &g, g_prev: &g, d_prev: &d, t: 7 };
        assert_eq!(gamma(GammaKind::Fr, &ctx).unwrap(), 1.0);
    }

    #[test]
    fn fixture_values() {
        let (g, gp, dp) = fixture();
        let ctx = CgContext { g_curr: &g, g_prev: &gp, d_prev: &dp, t: 2 };
        let got: Vec<f64> = GammaKind::all(2.0)
            .into_iter()
            .map(|k| gamma(k, &ctx).unwrap())
            .collect();
        assert_eq!(got, vec![-1.0, 2.0, 1.0, -2.0, 1.0]);
    }

    #[test]
    fn singular_denominators_yield_zero() {
        // d_prev orthogonal to y and g_prev = 0.
        let g = v(&[1.0, 0.0]);
        let gp = v(&[0.0, 0.0]);
        let dp = v(&[0.0, 1.0]);
        let ctx = CgContext { g_curr: &g, g_prev: &gp, d_prev: &dp, t: 3 };
        for kind in GammaKind::all(2.0) {
            assert_eq!(gamma(kind, &ctx).unwrap(), 0.0, "{kind}");
        }
    }

    #[test]
    fn hager_zhang_lambda_validated() {
        assert!(GammaKind::hager_zhang(0.25).is_err());
        assert!(GammaKind::hager_zhang(0.26).is_ok());
        assert!("hz".parse::<GammaKind<f64>>().is_ok());
        assert!("xx".parse::<GammaKind<f64>>().is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let g = v(&[1.0, 0.0]);
        let gp = v(&[1.0]);
        let ctx = CgContext { g_curr: &g, g_prev: &gp, d_prev: &g, t: 2 };
        assert!(gamma(GammaKind::<f64>::Hs, &ctx).is_err());
    }

    #[test]
    fn direction_examples() {
        let zero = v(&[0.0, 0.0]);
        assert_eq!(cg_direction(&v(&[3.0, -1.0]), 0.7, &zero, 1e-4, 1.5, 1).unwrap(), v(&[3.0, -1.0]));
        assert_eq!(cg_direction(&v(&[2.0, 2.0]), 0.0, &v(&[5.0, 5.0]), 1e-4, 1.5, 4).unwrap(), v(&[2.0, 2.0]));
        let d = cg_direction(&v(&[1.0, 1.0]), 2.0, &v(&[0.0, -1.0]), 1e-4, 1.0, 2).unwrap();
        assert_eq!(d[0], 1.0);
        assert!((d[1] - 1.0001).abs() < 1e-15);
    }

    #[test]
    fn zero_scale_returns_gradient_exactly() {
        let g = v(&[0.1, -0.2]);
        let d = cg_direction(&g, 3.5, &v(&[1e3, -1e3]), 0.0, 1.5, 9).unwrap();
        assert_eq!(d, g);
    }

    #[test]
    fn damping_strictly_decreases() {
        let (m, a) = (1e-4, 1.0 + 1e-5);
        let mut prev = damping(m, a, 1);
        for t in 2..=1_000_000u64 {
            let c = damping(m, a, t);
            assert!(c < prev, "t = {t}");
            prev = c;
        }
        assert!(prev < 1e-9);
    }
}
