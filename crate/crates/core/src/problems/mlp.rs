//! One-hidden-layer binary classifier with hand-written backpropagation.
//!
//! Parameters are packed as `[W1 (hidden × input, row-major), b1, w2, b2]`.

use serde::{Deserialize, Serialize};

use super::loss::{bce_with_logit, sigmoid};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Sigmoid,
}

impl Activation {
    fn apply<T: Scalar>(self, z: T) -> T {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => sigmoid(z),
        }
    }

    /// Derivative expressed through the activation's output `h`.
    fn slope<T: Scalar>(self, h: T) -> T {
        match self {
            Activation::Tanh => T::one() - h * h,
            Activation::Sigmoid => h * (T::one() - h),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpShape {
    pub input: usize,
    pub hidden: usize,
    pub activation: Activation,
}

impl MlpShape {
    pub fn param_count(&self) -> usize {
        self.hidden * self.input + 2 * self.hidden + 1
    }

    fn offsets(&self) -> (usize, usize, usize) {
        let b1 = self.hidden * self.input;
        let w2 = b1 + self.hidden;
        let b2 = w2 + self.hidden;
        (b1, w2, b2)
    }

    fn hidden_layer<T: Scalar>(&self, params: &[T], a: &[T]) -> Vec<T> {
        let (b1, _, _) = self.offsets();
        (0..self.hidden)
            .map(|j| {
                let row = &params[j * self.input..(j + 1) * self.input];
                let pre = row.iter().zip(a).fold(params[b1 + j], |acc, (&w, &x)| acc + w * x);
                self.activation.apply(pre)
            })
            .collect()
    }

    /// Output logit `s`; the predicted probability is `sigmoid(s)`.
    pub fn logit<T: Scalar>(&self, params: &[T], a: &[T]) -> T {
        let (_, w2, b2) = self.offsets();
        let h = self.hidden_layer(params, a);
        h.iter()
            .zip(&params[w2..b2])
            .fold(params[b2], |acc, (&hj, &w)| acc + w * hj)
    }

    /// BCE loss on one example and its gradient with respect to every parameter.
    pub fn loss_grad<T: Scalar>(&self, params: &[T], a: &[T], y: T) -> (T, Vec<T>) {
        let (b1, w2, b2) = self.offsets();
        let h = self.hidden_layer(params, a);
        let s = h
            .iter()
            .zip(&params[w2..b2])
            .fold(params[b2], |acc, (&hj, &w)| acc + w * hj);
        let loss = bce_with_logit(s, y);

        let ds = sigmoid(s) - y;
        let mut grad = vec![T::zero(); self.param_count()];
        grad[b2] = ds;
        for j in 0..self.hidden {
            grad[w2 + j] = ds * h[j];
            let dpre = ds * params[w2 + j] * self.activation.slope(h[j]);
            grad[b1 + j] = dpre;
            for (g, &x) in grad[j * self.input..(j + 1) * self.input].iter_mut().zip(a) {
                *g = dpre * x;
            }
        }
        (loss, grad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let shape = MlpShape { input: 2, hidden: 3, activation: Activation::Tanh };
        assert_eq!(shape.param_count(), 2 * 3 + 3 + 3 + 1);
    }

    #[test]
    fn zero_parameters_predict_one_half() {
        let shape = MlpShape { input: 2, hidden: 4, activation: Activation::Tanh };
        let params = vec![0.0; shape.param_count()];
        assert_eq!(shape.logit(&params, &[1.0, -2.0]), 0.0);
        let (loss, grad) = shape.loss_grad(&params, &[1.0, -2.0], 1.0);
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-15);
        // Only the output bias sees a gradient when every weight is zero.
        assert_eq!(grad[shape.param_count() - 1], -0.5);
        assert!(grad[..shape.param_count() - 1].iter().all(|&g| g == 0.0));
    }
}
