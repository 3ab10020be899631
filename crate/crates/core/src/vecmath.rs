//! Dense vector primitives and the diagonal (Mahalanobis) metric.
//!
//! Every vector that flows through an update rule is a [`ParamVector`]: a
//! fixed-length list of finite coordinates. Dimension mismatches are errors;
//! nothing is broadcast.

use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::scalar::Scalar;

/// Dense real vector whose entries are all finite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector<T>(Vec<T>);

impl<T: Scalar> ParamVector<T> {
    /// Wraps `coords`, rejecting NaN and infinities.
    pub fn new(coords: Vec<T>) -> Result<Self> {
        if coords.iter().all(|c| c.is_finite()) {
            Ok(Self(coords))
        } else {
            Err(Error::NonFinite("vector coordinates"))
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![T::zero(); n])
    }

    pub fn filled(n: usize, value: T) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn from_f64(coords: &[f64]) -> Result<Self> {
        Self::new(coords.iter().map(|&c| T::lit(c)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.0.iter()
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.0.iter().map(|c| c.to_f64_lossy()).collect()
    }

    /// Euclidean norm.
    pub fn norm(&self) -> T {
        self.0.iter().map(|&c| c * c).sum::<T>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    /// `self - other`, element-wise.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dims(self.len(), other.len())?;
        Self::new(self.0.iter().zip(&other.0).map(|(&a, &b)| a - b).collect())
    }

    /// `self + scale * other`, element-wise.
    pub fn axpy(&self, scale: T, other: &Self) -> Result<Self> {
        check_dims(self.len(), other.len())?;
        Self::new(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&a, &b)| a + scale * b)
                .collect(),
        )
    }

    pub fn scale(&self, factor: T) -> Result<Self> {
        Self::new(self.0.iter().map(|&a| a * factor).collect())
    }

    pub(crate) fn from_vec_unchecked(coords: Vec<T>) -> Self {
        debug_assert!(coords.iter().all(|c| c.is_finite()));
        Self(coords)
    }
}

impl<T> Index<usize> for ParamVector<T> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T: Scalar> TryFrom<Vec<T>> for ParamVector<T> {
    type Error = Error;

    fn try_from(coords: Vec<T>) -> Result<Self> {
        Self::new(coords)
    }
}

/// Diagonal metric `A = diag(a)` with nonnegative weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagMetric<T> {
    diag: ParamVector<T>,
}

impl<T: Scalar> DiagMetric<T> {
    pub fn new(diag: ParamVector<T>) -> Result<Self> {
        if let Some((index, value)) = diag.iter().enumerate().find(|(_, w)| **w < T::zero()) {
            return Err(Error::Metric {
                index,
                value: value.to_f64_lossy(),
            });
        }
        Ok(Self { diag })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            diag: ParamVector(vec![T::one(); n]),
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn weights(&self) -> &[T] {
        self.diag.as_slice()
    }

    /// Errors unless every weight is strictly positive.
    pub fn require_positive(&self) -> Result<()> {
        match self.diag.iter().enumerate().find(|(_, w)| **w <= T::zero()) {
            Some((index, value)) => Err(Error::Metric {
                index,
                value: value.to_f64_lossy(),
            }),
            None => Ok(()),
        }
    }

    /// True when every weight equals the first one.
    pub(crate) fn is_isotropic(&self) -> bool {
        let w = self.weights();
        w.iter().all(|&x| x == w[0])
    }
}

/// `ã`: the element-wise square.
pub fn elemwise_square<T: Scalar>(a: &ParamVector<T>) -> ParamVector<T> {
    ParamVector::from_vec_unchecked(a.iter().map(|&x| x * x).collect())
}

/// `max{a, b}` taken coordinate by coordinate.
pub fn elemwise_max<T: Scalar>(a: &ParamVector<T>, b: &ParamVector<T>) -> Result<ParamVector<T>> {
    check_dims(a.len(), b.len())?;
    Ok(ParamVector::from_vec_unchecked(
        a.iter().zip(b.iter()).map(|(&x, &y)| x.max(y)).collect(),
    ))
}

/// Euclidean inner product.
pub fn inner<T: Scalar>(a: &ParamVector<T>, b: &ParamVector<T>) -> Result<T> {
    check_dims(a.len(), b.len())?;
    Ok(dot(a.as_slice(), b.as_slice()))
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// `‖a‖∞ = max_i |a_i|`; zero for the empty vector.
pub fn norm_inf<T: Scalar>(a: &ParamVector<T>) -> T {
    a.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()))
}

/// `‖x‖_A = sqrt(Σ A_i x_i²)`.
pub fn metric_norm<T: Scalar>(metric: &DiagMetric<T>, x: &ParamVector<T>) -> Result<T> {
    check_dims(metric.len(), x.len())?;
    Ok(metric
        .weights()
        .iter()
        .zip(x.iter())
        .map(|(&w, &c)| w * c * c)
        .sum::<T>()
        .sqrt())
}
