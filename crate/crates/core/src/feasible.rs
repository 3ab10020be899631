//! Feasible sets and the metric projection `Π_{F,A}`.

use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::scalar::Scalar;
use crate::vecmath::{DiagMetric, ParamVector};

/// Residual tolerance for the ball projection's root solve.
const BALL_RESIDUAL_TOL: f64 = 1e-12;
const BALL_MAX_ITERS: usize = 200;

/// Closed convex feasible region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum FeasibleSet<T> {
    FullSpace,
    Box {
        lower: ParamVector<T>,
        upper: ParamVector<T>,
    },
    Ball {
        center: ParamVector<T>,
        radius: T,
    },
}

/// ℓ∞ diameter of a feasible set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Diameter<T> {
    Bounded(T),
    Unbounded,
}

impl<T: Scalar> Diameter<T> {
    pub fn bounded(self) -> Option<T> {
        match self {
            Diameter::Bounded(d) => Some(d),
            Diameter::Unbounded => None,
        }
    }
}

impl<T: Scalar> FeasibleSet<T> {
    pub fn new_box(lower: ParamVector<T>, upper: ParamVector<T>) -> Result<Self> {
        check_dims(lower.len(), upper.len())?;
        if let Some(i) = (0..lower.len()).find(|&i| lower[i] > upper[i]) {
            return Err(Error::InvalidSet(format!(
                "box lower bound exceeds upper bound at coordinate {i}"
            )));
        }
        Ok(FeasibleSet::Box { lower, upper })
    }

    /// The cube `[-bound, bound]^n`.
    pub fn symmetric_box(n: usize, bound: T) -> Result<Self> {
        let upper = ParamVector::filled(n, bound)?;
        let lower = ParamVector::filled(n, -bound)?;
        Self::new_box(lower, upper)
    }

    pub fn new_ball(center: ParamVector<T>, radius: T) -> Result<Self> {
        if !(radius.is_finite() && radius > T::zero()) {
            return Err(Error::InvalidSet(format!(
                "ball radius must be finite and positive, got {radius}"
            )));
        }
        Ok(FeasibleSet::Ball { center, radius })
    }

    /// Dimension fixed by the set, if any.
    pub fn dim(&self) -> Option<usize> {
        match self {
            FeasibleSet::FullSpace => None,
            FeasibleSet::Box { lower, .. } => Some(lower.len()),
            FeasibleSet::Ball { center, .. } => Some(center.len()),
        }
    }

    pub fn diameter_inf(&self) -> Diameter<T> {
        match self {
            FeasibleSet::FullSpace => Diameter::Unbounded,
            FeasibleSet::Box { lower, upper } => Diameter::Bounded(
                lower
                    .iter()
                    .zip(upper.iter())
                    .fold(T::zero(), |acc, (&l, &u)| acc.max(u - l)),
            ),
            FeasibleSet::Ball { radius, .. } => Diameter::Bounded(*radius + *radius),
        }
    }

    /// Membership test with slack `tol`.
    pub fn contains(&self, x: &ParamVector<T>, tol: T) -> bool {
        if self.dim().is_some_and(|n| n != x.len()) {
            return false;
        }
        match self {
            FeasibleSet::FullSpace => true,
            FeasibleSet::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper.iter()))
                .all(|(&c, (&l, &u))| c >= l - tol && c <= u + tol),
            FeasibleSet::Ball { center, radius } => {
                distance(x.as_slice(), center.as_slice()) <= *radius + tol
            }
        }
    }

    /// `argmin_{x ∈ F} ‖x − y‖_A` for a strictly positive diagonal `A`.
    pub fn project(&self, metric: &DiagMetric<T>, y: &ParamVector<T>) -> Result<ParamVector<T>> {
        check_dims(metric.len(), y.len())?;
        metric.require_positive()?;
        if let Some(n) = self.dim() {
            check_dims(n, y.len())?;
        }
        match self {
            FeasibleSet::FullSpace => Ok(y.clone()),
            FeasibleSet::Box { lower, upper } => Ok(ParamVector::from_vec_unchecked(
                y.iter()
                    .zip(lower.iter().zip(upper.iter()))
                    .map(|(&c, (&l, &u))| c.max(l).min(u))
                    .collect(),
            )),
            FeasibleSet::Ball { center, radius } => {
                project_ball(metric.weights(), center.as_slice(), *radius, y)
            }
        }
    }
}

fn distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<T>()
        .sqrt()
}

/// Point on the KKT curve `x_i(θ) = c_i + A_i (y_i − c_i) / (A_i + θ)`.
fn ball_point<T: Scalar>(weights: &[T], center: &[T], y: &[T], theta: T) -> Vec<T> {
    weights
        .iter()
        .zip(center.iter().zip(y))
        .map(|(&w, (&c, &yi))| c + w * (yi - c) / (w + theta))
        .collect()
}

fn project_ball<T: Scalar>(
    weights: &[T],
    center: &[T],
    radius: T,
    y: &ParamVector<T>,
) -> Result<ParamVector<T>> {
    let y = y.as_slice();
    let dist = distance(y, center);
    if dist <= radius {
        return Ok(ParamVector::from_vec_unchecked(y.to_vec()));
    }

    let metric = DiagMetric::new(ParamVector::from_vec_unchecked(weights.to_vec()))?;
    if metric.is_isotropic() {
        // Equal weights: the metric projection is the Euclidean radial one.
        let scale = radius / dist;
        let x: Vec<T> = center
            .iter()
            .zip(y)
            .map(|(&c, &yi)| c + (yi - c) * scale)
            .collect();
        return Ok(ParamVector::from_vec_unchecked(shrink_inside(x, center, radius)));
    }

    // ‖x(θ) − c‖ − r is decreasing in θ; bracket the root then bisect.
    let residual = |theta: T| distance(&ball_point(weights, center, y, theta), center) - radius;
    let tol = T::lit(BALL_RESIDUAL_TOL);
    let mut lo = T::zero();
    let mut hi = T::one();
    let mut grow = 0;
    while residual(hi) > T::zero() {
        lo = hi;
        hi = hi + hi;
        grow += 1;
        if grow > 2000 || !hi.is_finite() {
            return Err(Error::NonFinite("ball projection multiplier"));
        }
    }
    for _ in 0..BALL_MAX_ITERS {
        let mid = lo + (hi - lo) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        let r = residual(mid);
        if r > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
        if r.abs() <= tol && r <= T::zero() {
            break;
        }
    }
    // hi keeps the iterate on the feasible side of the sphere.
    let x = ball_point(weights, center, y, hi);
    Ok(ParamVector::from_vec_unchecked(shrink_inside(x, center, radius)))
}

/// Pulls a point that rounding left just outside the sphere back onto it.
fn shrink_inside<T: Scalar>(mut x: Vec<T>, center: &[T], radius: T) -> Vec<T> {
    for _ in 0..4 {
        let d = distance(&x, center);
        if d <= radius {
            break;
        }
        let s = radius / d;
        for (xi, &c) in x.iter_mut().zip(center) {
            *xi = c + (*xi - c) * s;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> ParamVector<f64> {
        ParamVector::from_f64(c).unwrap()
    }

    fn metric(c: &[f64]) -> DiagMetric<f64> {
        DiagMetric::new(v(c)).unwrap()
    }

    #[test]
    fn diameters() {
        let b = FeasibleSet::new_box(v(&[0.0, 0.0]), v(&[1.0, 3.0])).unwrap();
        assert_eq!(b.diameter_inf(), Diameter::Bounded(3.0));
        let ball = FeasibleSet::new_ball(v(&[0.0, 0.0]), 1.0).unwrap();
        assert_eq!(ball.diameter_inf(), Diameter::Bounded(2.0));
        assert_eq!(FeasibleSet::<f64>::FullSpace.diameter_inf(), Diameter::Unbounded);
    }

    #[test]
    fn invalid_sets_rejected() {
        assert!(FeasibleSet::new_box(v(&[1.0]), v(&[0.0])).is_err());
        assert!(FeasibleSet::new_box(v(&[1.0]), v(&[0.0, 2.0])).is_err());
        assert!(FeasibleSet::new_ball(v(&[0.0]), 0.0).is_err());
        assert!(FeasibleSet::new_ball(v(&[0.0]), f64::INFINITY).is_err());
    }

    #[test]
    fn full_space_is_identity() {
        let y = v(&[5.0, -5.0]);
        let p = FeasibleSet::FullSpace.project(&metric(&[3.0, 0.5]), &y).unwrap();
        assert_eq!(p, y);
    }

    #[test]
    fn box_clamps_under_any_diagonal_metric() {
        let b = FeasibleSet::new_box(v(&[0.0, 0.0]), v(&[1.0, 1.0])).unwrap();
        let p = b.project(&metric(&[4.0, 1.0]), &v(&[3.0, -2.0])).unwrap();
        assert_eq!(p, v(&[1.0, 0.0]));
    }

    #[test]
    fn ball_scales_radially_under_identity() {
        let ball = FeasibleSet::new_ball(v(&[0.0, 0.0]), 1.0).unwrap();
        let p = ball.project(&DiagMetric::identity(2), &v(&[3.0, 4.0])).unwrap();
        assert!((p[0] - 0.6).abs() < 1e-12 && (p[1] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn ball_projection_under_metric_lands_on_sphere() {
        let ball = FeasibleSet::new_ball(v(&[1.0, -1.0, 0.5]), 2.0).unwrap();
        let y = v(&[10.0, 3.0, -7.0]);
        let p = ball.project(&metric(&[5.0, 0.1, 1.0]), &y).unwrap();
        let d = distance(p.as_slice(), &[1.0, -1.0, 0.5]);
        assert!(d <= 2.0 && 2.0 - d < 1e-10, "distance {d}");
    }

    #[test]
    fn rejects_degenerate_metric() {
        let b = FeasibleSet::symmetric_box(2, 1.0).unwrap();
        assert!(matches!(
            b.project(&metric(&[1.0, 0.0]), &v(&[0.0, 0.0])),
            Err(Error::Metric { index: 1, .. })
        ));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let b = FeasibleSet::symmetric_box(3, 1.0).unwrap();
        assert!(b.project(&DiagMetric::identity(2), &v(&[0.0, 0.0])).is_err());
    }
}
