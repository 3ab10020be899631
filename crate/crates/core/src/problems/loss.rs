//! Binary and multi-class cross-entropy, plus the numerically stable logit
//! forms the problems use internally.

use crate::error::{check_dims, Error, Result};
use crate::scalar::Scalar;

/// Predictions are clipped into `[ζ, 1 − ζ]` before taking logs.
pub const CLIP: f64 = 1e-12;

fn is_binary<T: Scalar>(y: T) -> bool {
    y == T::zero() || y == T::one()
}

/// Mean binary cross-entropy `−(1/T) Σ y log z + (1 − y) log(1 − z)`.
pub fn bce_loss<T: Scalar>(labels: &[T], preds: &[T]) -> Result<T> {
    check_dims(labels.len(), preds.len())?;
    if labels.is_empty() {
        return Err(Error::Input("empty batch".into()));
    }
    if !labels.iter().copied().all(is_binary) {
        return Err(Error::Input("binary labels must be 0 or 1".into()));
    }
    if preds.iter().any(|z| !z.is_finite()) {
        return Err(Error::NonFinite("predictions"));
    }
    let lo = T::lit(CLIP);
    let hi = T::one() - lo;
    let total: T = labels
        .iter()
        .zip(preds)
        .map(|(&y, &z)| {
            let z = z.max(lo).min(hi);
            -(y * z.ln() + (T::one() - y) * (T::one() - z).ln())
        })
        .sum();
    Ok(total / T::lit(labels.len() as f64))
}

/// Mean categorical cross-entropy `−(1/T) Σ_t Σ_k y_{t,k} log z_{t,k}`.
///
/// Rows of `preds` are clipped below at ζ and renormalized.
pub fn ce_loss<T: Scalar>(labels: &[Vec<T>], preds: &[Vec<T>]) -> Result<T> {
    check_dims(labels.len(), preds.len())?;
    if labels.is_empty() {
        return Err(Error::Input("empty batch".into()));
    }
    let lo = T::lit(CLIP);
    let mut total = T::zero();
    for (y, z) in labels.iter().zip(preds) {
        check_dims(y.len(), z.len())?;
        check_one_hot(y)?;
        if z.iter().any(|p| !p.is_finite() || *p < T::zero()) {
            return Err(Error::Input("predictions must be finite and nonnegative".into()));
        }
        let clipped: Vec<T> = z.iter().map(|&p| p.max(lo)).collect();
        let norm: T = clipped.iter().copied().sum();
        total = total
            - y.iter()
                .zip(&clipped)
                .map(|(&yk, &zk)| yk * (zk / norm).ln())
                .sum::<T>();
    }
    Ok(total / T::lit(labels.len() as f64))
}

pub(crate) fn check_one_hot<T: Scalar>(row: &[T]) -> Result<()> {
    let ones = row.iter().filter(|&&y| y == T::one()).count();
    if row.iter().copied().all(is_binary) && ones == 1 {
        Ok(())
    } else {
        Err(Error::Input("label row is not one-hot".into()))
    }
}

pub fn sigmoid<T: Scalar>(s: T) -> T {
    if s >= T::zero() {
        T::one() / (T::one() + (-s).exp())
    } else {
        let e = s.exp();
        e / (T::one() + e)
    }
}

/// `log(1 + e^s)` without overflow.
pub fn softplus<T: Scalar>(s: T) -> T {
    s.max(T::zero()) + (-s.abs()).exp().ln_1p()
}

/// BCE of `sigmoid(logit)` against `y`, exact for all logits.
pub fn bce_with_logit<T: Scalar>(logit: T, y: T) -> T {
    softplus(logit) - y * logit
}

/// Softmax probabilities and `log Σ exp(z)`.
pub fn softmax<T: Scalar>(logits: &[T]) -> (Vec<T>, T) {
    let top = logits.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
    let exps: Vec<T> = logits.iter().map(|&z| (z - top).exp()).collect();
    let sum: T = exps.iter().copied().sum();
    let lse = top + sum.ln();
    (exps.into_iter().map(|e| e / sum).collect(), lse)
}
