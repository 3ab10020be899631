use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::loss::check_one_hot;
use crate::error::{check_dims, Error, Result};
use crate::scalar::Scalar;

/// Labels of a batch: binary `{0, 1}` or one-hot rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Labels<T> {
    Binary(Vec<T>),
    OneHot(Vec<Vec<T>>),
}

impl<T: Scalar> Labels<T> {
    pub fn len(&self) -> usize {
        match self {
            Labels::Binary(y) => y.len(),
            Labels::OneHot(y) => y.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledBatch<T> {
    inputs: Vec<Vec<T>>,
    labels: Labels<T>,
}

impl<T: Scalar> LabeledBatch<T> {
    pub fn new(inputs: Vec<Vec<T>>, labels: Labels<T>) -> Result<Self> {
        check_dims(inputs.len(), labels.len())?;
        if let Some(first) = inputs.first() {
            for row in &inputs {
                check_dims(first.len(), row.len())?;
            }
        }
        if inputs.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("batch inputs"));
        }
        match &labels {
            Labels::Binary(y) => {
                if y.iter().any(|&v| v != T::zero() && v != T::one()) {
                    return Err(Error::Input("binary labels must be 0 or 1".into()));
                }
            }
            Labels::OneHot(rows) => {
                for row in rows {
                    check_one_hot(row)?;
                }
            }
        }
        Ok(Self { inputs, labels })
    }

    pub fn inputs(&self) -> &[Vec<T>] {
        &self.inputs
    }

    pub fn labels(&self) -> &Labels<T> {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.inputs.first().map_or(0, Vec::len)
    }
}

/// Gap between the two classes along the mean direction.
pub const TWO_GAUSSIAN_MARGIN: f64 = 1.0;

/// Two unit-covariance Gaussians at `±μ₀` (with `‖μ₀‖ = separation`), labels
/// alternating 1/0. Samples closer than half the margin to the separating
/// hyperplane, or on its wrong side, are redrawn, so the set is linearly
/// separable with margin 1.
pub fn two_gaussians<T: Scalar>(
    points: usize,
    dim: usize,
    separation: f64,
    seed: u64,
) -> Result<LabeledBatch<T>> {
    if dim == 0 {
        return Err(Error::Input("feature dimension must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = 1.0 / (dim as f64).sqrt();
    let half = TWO_GAUSSIAN_MARGIN / 2.0;
    let mut inputs = Vec::with_capacity(points);
    let mut labels = Vec::with_capacity(points);
    for i in 0..points {
        let positive = i % 2 == 0;
        let sign = if positive { 1.0 } else { -1.0 };
        let x = loop {
            let x: Vec<f64> = (0..dim)
                .map(|_| sign * separation * unit + rng.sample::<f64, _>(StandardNormal))
                .collect();
            let along: f64 = x.iter().map(|c| c * unit).sum();
            if sign * along >= half {
                break x;
            }
        };
        inputs.push(x.into_iter().map(T::lit).collect());
        labels.push(if positive { T::one() } else { T::zero() });
    }
    LabeledBatch::new(inputs, Labels::Binary(labels))
}
