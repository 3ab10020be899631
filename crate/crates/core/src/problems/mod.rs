//! Synthetic online problems: per-step losses with analytic gradients, offline
//! comparators for the convex ones, and analytic gradient bounds.
//!
//! Every random draw is keyed on `(seed, t)`, so `loss_and_grad` is a pure
//! function of the instance, the point and the step.

pub mod data;
pub mod loss;
pub mod mlp;

use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::feasible::FeasibleSet;
use crate::scalar::Scalar;
use crate::vecmath::{dot, DiagMetric, ParamVector};

pub use data::{two_gaussians, LabeledBatch, Labels};
pub use loss::{bce_loss, ce_loss, sigmoid, softmax, softplus};
pub use mlp::{Activation, MlpShape};

const CONSTRUCTION_STREAM: u64 = u64::MAX;
const EVALUATION_STREAM: u64 = u64::MAX - 1;
const INITIAL_POINT_STREAM: u64 = u64::MAX - 2;
const EPOCH_STREAM_BASE: u64 = 1 << 62;

/// Points passed to `loss_and_grad` may sit this far outside the set.
pub const FEASIBILITY_TOL: f64 = 1e-10;
/// Stopping tolerance on the gradient mapping of the comparator solver.
pub const COMPARATOR_TOL: f64 = 1e-10;
pub const COMPARATOR_MAX_ITER: usize = 1_000_000;
pub const STREAM_EPOCH: u64 = 1000;

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn symmetric<T: Scalar>(rng: &mut ChaCha8Rng, half_width: T) -> T {
    T::lit(rng.random_range(-1.0..=1.0)) * half_width
}

/// How the quadratic's centers `c_t` are drawn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum CenterStream<T> {
    /// `c_t = mean + spread·u`, `u` uniform on `[−1, 1]^N`.
    Uniform { mean: Vec<T>, spread: T },
    /// `c_t` runs through the list in order, wrapping around.
    Cycle(Vec<Vec<T>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ProblemKind<T> {
    /// `f_t(x) = ½ Σ Q_i (x_i − c_{t,i})²`.
    StochasticQuadratic { curvature: Vec<T>, centers: CenterStream<T> },
    /// BCE of `σ(⟨x, a_t⟩)`; `a_t` uniform on `[−s, s]^N`, `y_t ~ Bernoulli(σ(⟨w*, a_t⟩))`.
    OnlineLogistic { truth: Vec<T>, feature_scale: T },
    /// CE of `softmax(W a_t)` with `W` stored row-major as `K × dim`.
    /// Class `k` is uniform; `a_t = μ_k + noise·u`, `u` uniform on `[−1, 1]^dim`.
    SoftmaxLinear { class_means: Vec<Vec<T>>, noise: T },
    /// One hidden layer trained on a fixed labelled set, one example per step,
    /// reshuffled every epoch.
    TinyMlp { shape: MlpShape, data: Arc<LabeledBatch<T>> },
}

impl<T: Scalar> ProblemKind<T> {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemKind::StochasticQuadratic { .. } => "quadratic",
            ProblemKind::OnlineLogistic { .. } => "logistic",
            ProblemKind::SoftmaxLinear { .. } => "softmax",
            ProblemKind::TinyMlp { .. } => "mlp",
        }
    }

    pub fn is_convex(&self) -> bool {
        !matches!(self, ProblemKind::TinyMlp { .. })
    }

    pub fn dim(&self) -> usize {
        match self {
            ProblemKind::StochasticQuadratic { curvature, .. } => curvature.len(),
            ProblemKind::OnlineLogistic { truth, .. } => truth.len(),
            ProblemKind::SoftmaxLinear { class_means, .. } => {
                class_means.len() * class_means.first().map_or(0, Vec::len)
            }
            ProblemKind::TinyMlp { shape, .. } => shape.param_count(),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Input(msg.into()));
        match self {
            ProblemKind::StochasticQuadratic { curvature, centers } => {
                if curvature.is_empty() || curvature.iter().any(|&q| !(q > T::zero()) || !q.is_finite()) {
                    return bad("curvature entries must be positive and finite");
                }
                match centers {
                    CenterStream::Uniform { mean, spread } => {
                        check_dims(curvature.len(), mean.len())?;
                        if !(*spread >= T::zero()) || !spread.is_finite() {
                            return bad("center spread must be nonnegative");
                        }
                    }
                    CenterStream::Cycle(list) => {
                        if list.is_empty() {
                            return bad("center cycle is empty");
                        }
                        for c in list {
                            check_dims(curvature.len(), c.len())?;
                        }
                    }
                }
            }
            ProblemKind::OnlineLogistic { truth, feature_scale } => {
                if truth.is_empty() {
                    return bad("logistic weights are empty");
                }
                if !(*feature_scale >= T::zero()) || !feature_scale.is_finite() {
                    return bad("feature scale must be nonnegative");
                }
            }
            ProblemKind::SoftmaxLinear { class_means, noise } => {
                if class_means.len() < 2 || class_means[0].is_empty() {
                    return bad("softmax needs at least two classes and one feature");
                }
                for m in class_means {
                    check_dims(class_means[0].len(), m.len())?;
                }
                if !(*noise >= T::zero()) || !noise.is_finite() {
                    return bad("noise must be nonnegative");
                }
            }
            ProblemKind::TinyMlp { shape, data } => {
                if shape.hidden == 0 {
                    return bad("hidden width must be at least 1");
                }
                if data.is_empty() {
                    return bad("training set is empty");
                }
                check_dims(shape.input, data.feature_dim())?;
                if !matches!(data.labels(), Labels::Binary(_)) {
                    return bad("the network is a binary classifier");
                }
            }
        }
        for v in self.parameters() {
            if !v.is_finite() {
                return Err(Error::NonFinite("problem parameters"));
            }
        }
        Ok(())
    }

    fn parameters(&self) -> Vec<T> {
        match self {
            ProblemKind::StochasticQuadratic { curvature, centers } => {
                let mut all = curvature.clone();
                match centers {
                    CenterStream::Uniform { mean, .. } => all.extend(mean),
                    CenterStream::Cycle(list) => all.extend(list.iter().flatten()),
                }
                all
            }
            ProblemKind::OnlineLogistic { truth, .. } => truth.clone(),
            ProblemKind::SoftmaxLinear { class_means, .. } => class_means.iter().flatten().copied().collect(),
            ProblemKind::TinyMlp { .. } => Vec::new(),
        }
    }
}

/// One example drawn for a step of a linear model.
enum Sample<T> {
    Binary { features: Vec<T>, label: T },
    Class { features: Vec<T>, class: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance<T> {
    kind: ProblemKind<T>,
    feasible: FeasibleSet<T>,
    seed: u64,
    init_scale: T,
}

impl<T: Scalar> ProblemInstance<T> {
    pub fn new(kind: ProblemKind<T>, feasible: FeasibleSet<T>, seed: u64, init_scale: T) -> Result<Self> {
        kind.validate()?;
        if let Some(n) = feasible.dim() {
            check_dims(kind.dim(), n)?;
        }
        if !(init_scale >= T::zero()) || !init_scale.is_finite() {
            return Err(Error::Input("initial scale must be nonnegative".into()));
        }
        Ok(Self { kind, feasible, seed, init_scale })
    }

    /// Curvatures in `[0.5, 2]`, center means in `[−0.5, 0.5]` and spread
    /// `0.5`, so every center lies in `[−1, 1]^N`.
    pub fn quadratic(n: usize, feasible: FeasibleSet<T>, seed: u64) -> Result<Self> {
        let mut rng = stream_rng(seed, CONSTRUCTION_STREAM);
        let curvature = (0..n).map(|_| T::lit(rng.random_range(0.5..=2.0))).collect();
        let mean = (0..n).map(|_| T::lit(rng.random_range(-0.5..=0.5))).collect();
        let centers = CenterStream::Uniform { mean, spread: T::lit(0.5) };
        Self::new(ProblemKind::StochasticQuadratic { curvature, centers }, feasible, seed, T::lit(5.0))
    }

    /// Ground-truth weights uniform on `[−1, 1]^N`, features on `[−1, 1]^N`.
    pub fn logistic(n: usize, feasible: FeasibleSet<T>, seed: u64) -> Result<Self> {
        let mut rng = stream_rng(seed, CONSTRUCTION_STREAM);
        let truth = (0..n).map(|_| symmetric(&mut rng, T::one())).collect();
        let kind = ProblemKind::OnlineLogistic { truth, feature_scale: T::one() };
        Self::new(kind, feasible, seed, T::one())
    }

    /// Class means uniform on `[−1, 1]^dim`, noise `0.5`.
    pub fn softmax(classes: usize, dim: usize, feasible: FeasibleSet<T>, seed: u64) -> Result<Self> {
        let mut rng = stream_rng(seed, CONSTRUCTION_STREAM);
        let class_means = (0..classes)
            .map(|_| (0..dim).map(|_| symmetric(&mut rng, T::one())).collect())
            .collect();
        let kind = ProblemKind::SoftmaxLinear { class_means, noise: T::lit(0.5) };
        Self::new(kind, feasible, seed, T::one())
    }

    /// Tanh network of width `hidden` on a 1 000-point, 2-feature two-Gaussian set.
    pub fn tiny_mlp(hidden: usize, feasible: FeasibleSet<T>, seed: u64) -> Result<Self> {
        let data = two_gaussians(1000, 2, 2.0, seed)?;
        let shape = MlpShape { input: 2, hidden, activation: Activation::Tanh };
        let kind = ProblemKind::TinyMlp { shape, data: Arc::new(data) };
        Self::new(kind, feasible, seed, T::lit(0.5))
    }

    pub fn kind(&self) -> &ProblemKind<T> {
        &self.kind
    }

    pub fn feasible(&self) -> &FeasibleSet<T> {
        &self.feasible
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    pub fn is_convex(&self) -> bool {
        self.kind.is_convex()
    }

    /// Steps per epoch: one pass over the training set for the network, a
    /// fixed 1 000 steps for the streams.
    pub fn steps_per_epoch(&self) -> u64 {
        match &self.kind {
            ProblemKind::TinyMlp { data, .. } => data.len() as u64,
            _ => STREAM_EPOCH,
        }
    }

    /// Seeded uniform point on `[−s, s]^N`, projected onto the feasible set.
    pub fn initial_point(&self) -> Result<ParamVector<T>> {
        let mut rng = stream_rng(self.seed, INITIAL_POINT_STREAM);
        let n = self.dim();
        let raw = ParamVector::new((0..n).map(|_| symmetric(&mut rng, self.init_scale)).collect())?;
        self.feasible.project(&DiagMetric::identity(n), &raw)
    }

    /// `f_t(x)` and `∇f_t(x)` for `t ≥ 1`.
    pub fn loss_and_grad(&self, x: &ParamVector<T>, t: u64) -> Result<(T, ParamVector<T>)> {
        check_dims(self.dim(), x.len())?;
        if !self.feasible.contains(x, T::lit(FEASIBILITY_TOL)) {
            return Err(Error::Precondition("point lies outside the feasible set".into()));
        }
        if t == 0 {
            return Err(Error::Input("steps are numbered from 1".into()));
        }
        let (loss, grad) = self.eval_unchecked(x.as_slice(), t);
        if !loss.is_finite() {
            return Err(Error::NonFinite("loss"));
        }
        Ok((loss, ParamVector::new(grad)?))
    }

    /// `f_t(x)` without the feasibility check, for finite differences and
    /// comparator losses.
    pub fn loss_at(&self, x: &ParamVector<T>, t: u64) -> Result<T> {
        check_dims(self.dim(), x.len())?;
        Ok(self.eval_unchecked(x.as_slice(), t).0)
    }

    fn eval_unchecked(&self, x: &[T], t: u64) -> (T, Vec<T>) {
        match &self.kind {
            ProblemKind::StochasticQuadratic { curvature, .. } => {
                let c = self.center(t);
                let half = T::lit(0.5);
                let mut loss = T::zero();
                let grad = curvature
                    .iter()
                    .zip(x)
                    .zip(&c)
                    .map(|((&q, &xi), &ci)| {
                        let r = xi - ci;
                        loss = loss + half * q * r * r;
                        q * r
                    })
                    .collect();
                (loss, grad)
            }
            ProblemKind::OnlineLogistic { .. } | ProblemKind::SoftmaxLinear { .. } => {
                linear_loss_grad(x, &self.sample(t))
            }
            ProblemKind::TinyMlp { shape, data } => {
                let i = self.mlp_index(t);
                let Labels::Binary(y) = data.labels() else { unreachable!("validated at construction") };
                shape.loss_grad(x, &data.inputs()[i], y[i])
            }
        }
    }

    fn center(&self, t: u64) -> Vec<T> {
        let ProblemKind::StochasticQuadratic { centers, .. } = &self.kind else {
            unreachable!("only the quadratic has centers")
        };
        match centers {
            CenterStream::Uniform { mean, spread } => {
                let mut rng = stream_rng(self.seed, t);
                mean.iter().map(|&m| m + symmetric(&mut rng, *spread)).collect()
            }
            CenterStream::Cycle(list) => list[((t - 1) % list.len() as u64) as usize].clone(),
        }
    }

    fn sample_from(&self, rng: &mut ChaCha8Rng) -> Sample<T> {
        match &self.kind {
            ProblemKind::OnlineLogistic { truth, feature_scale } => {
                let features: Vec<T> = truth.iter().map(|_| symmetric(rng, *feature_scale)).collect();
                let p = sigmoid(dot(truth, &features)).to_f64_lossy();
                let label = if rng.random_bool(p.clamp(0.0, 1.0)) { T::one() } else { T::zero() };
                Sample::Binary { features, label }
            }
            ProblemKind::SoftmaxLinear { class_means, noise } => {
                let class = rng.random_range(0..class_means.len());
                let features = class_means[class].iter().map(|&m| m + symmetric(rng, *noise)).collect();
                Sample::Class { features, class }
            }
            _ => unreachable!("only linear models draw samples"),
        }
    }

    fn sample(&self, t: u64) -> Sample<T> {
        self.sample_from(&mut stream_rng(self.seed, t))
    }

    /// Example index at step `t`: an affine permutation `p ↦ (a·p + b) mod n`
    /// drawn afresh for every epoch.
    fn mlp_index(&self, t: u64) -> usize {
        let n = self.steps_per_epoch() as usize;
        let epoch = (t - 1) / n as u64;
        let pos = ((t - 1) % n as u64) as usize;
        if n == 1 {
            return 0;
        }
        let mut rng = stream_rng(self.seed, EPOCH_STREAM_BASE + epoch);
        let a = loop {
            let a = rng.random_range(1..n);
            if gcd(a, n) == 1 {
                break a;
            }
        };
        let b = rng.random_range(0..n);
        (a * pos + b) % n
    }

    /// Offline minimizer of `Σ_{t ≤ T} f_t` over the feasible set.
    pub fn comparator(&self, horizon: u64) -> Result<ParamVector<T>> {
        if horizon == 0 {
            return Err(Error::Input("horizon must be positive".into()));
        }
        match &self.kind {
            ProblemKind::StochasticQuadratic { curvature, .. } => {
                let n = curvature.len();
                let mut mean = vec![T::zero(); n];
                for t in 1..=horizon {
                    for (m, c) in mean.iter_mut().zip(self.center(t)) {
                        *m = *m + c;
                    }
                }
                let inv = T::one() / T::lit(horizon as f64);
                let mean = ParamVector::new(mean.into_iter().map(|m| m * inv).collect())?;
                // The summed objective is ½T‖x − c̄‖²_Q plus a constant.
                let metric = DiagMetric::new(ParamVector::new(curvature.clone())?)?;
                self.feasible.project(&metric, &mean)
            }
            ProblemKind::OnlineLogistic { feature_scale, .. } => {
                let samples: Vec<_> = (1..=horizon).map(|t| self.sample(t)).collect();
                let s = feature_scale.to_f64_lossy();
                let lipschitz = 0.25 * s * s * self.dim() as f64;
                self.fista(&samples, lipschitz)
            }
            ProblemKind::SoftmaxLinear { class_means, noise } => {
                let samples: Vec<_> = (1..=horizon).map(|t| self.sample(t)).collect();
                let dim = class_means[0].len() as f64;
                let reach = class_means
                    .iter()
                    .flatten()
                    .fold(0.0f64, |acc, m| acc.max(m.to_f64_lossy().abs()))
                    + noise.to_f64_lossy();
                self.fista(&samples, 0.5 * reach * reach * dim)
            }
            ProblemKind::TinyMlp { .. } => {
                Err(Error::Unsupported("no comparator for a non-convex problem".into()))
            }
        }
    }

    /// Projected accelerated gradient on the averaged loss, restarting
    /// whenever the objective goes up. `lipschitz` bounds the gradient's
    /// Lipschitz constant.
    fn fista(&self, samples: &[Sample<T>], lipschitz: f64) -> Result<ParamVector<T>> {
        let n = self.dim();
        let identity = DiagMetric::identity(n);
        let start = ParamVector::zeros(n);
        let mut x = self.feasible.project(&identity, &start)?;
        if lipschitz <= 0.0 {
            return Ok(x);
        }
        let step = T::lit(1.0 / lipschitz);
        let objective = |p: &ParamVector<T>| averaged_loss_grad(p.as_slice(), samples);
        let mut y = x.clone();
        let mut momentum = T::one();
        let (mut fx, _) = objective(&x);
        for _ in 0..COMPARATOR_MAX_ITER {
            let (_, gy) = objective(&y);
            let next = self.feasible.project(&identity, &y.axpy(-step, &ParamVector::new(gy)?)?)?;
            let mapping = y.sub(&next)?.norm() / step;
            let (f_next, _) = objective(&next);
            let restarted = momentum == T::one();
            if f_next > fx && !restarted {
                // Restart from the last accepted point with a plain step.
                momentum = T::one();
                y = x.clone();
                continue;
            }
            if f_next <= fx {
                let next_momentum =
                    (T::one() + (T::one() + T::lit(4.0) * momentum * momentum).sqrt()) * T::lit(0.5);
                let beta = (momentum - T::one()) / next_momentum;
                y = next.axpy(beta, &next.sub(&x)?)?;
                x = next;
                fx = f_next;
                momentum = next_momentum;
            }
            if mapping.to_f64_lossy() <= COMPARATOR_TOL || (restarted && f_next > fx) {
                break;
            }
        }
        Ok(x)
    }

    /// Analytic bound on `sup_{x ∈ F, t} ‖∇f_t(x)‖∞`.
    pub fn gradient_bound(&self) -> Result<T> {
        let (lower, upper) = match &self.feasible {
            FeasibleSet::FullSpace => {
                return Err(Error::Unsupported("gradients are unbounded on the full space".into()))
            }
            FeasibleSet::Box { lower, upper } => (lower.as_slice().to_vec(), upper.as_slice().to_vec()),
            FeasibleSet::Ball { center, radius } => (
                center.iter().map(|&c| c - *radius).collect(),
                center.iter().map(|&c| c + *radius).collect(),
            ),
        };
        match &self.kind {
            ProblemKind::StochasticQuadratic { curvature, centers } => {
                let (cmin, cmax) = center_range(centers, curvature.len());
                let bound = (0..curvature.len()).fold(T::zero(), |acc, i| {
                    let reach = (upper[i] - cmin[i]).max(cmax[i] - lower[i]);
                    acc.max(curvature[i] * reach)
                });
                Ok(bound)
            }
            // |σ − y| ≤ 1 and every feature lies in [−s, s].
            ProblemKind::OnlineLogistic { feature_scale, .. } => Ok(*feature_scale),
            // |p_k − y_k| ≤ 1 and every feature lies within |μ| + noise.
            ProblemKind::SoftmaxLinear { class_means, noise } => {
                let top = class_means.iter().flatten().fold(T::zero(), |acc, m| acc.max(m.abs()));
                Ok(top + *noise)
            }
            ProblemKind::TinyMlp { .. } => {
                Err(Error::Unsupported("no analytic gradient bound for the network".into()))
            }
        }
    }

    /// Seeded held-out batch for the linear models; the training set for the network.
    pub fn evaluation_batch(&self, size: usize) -> Result<LabeledBatch<T>> {
        match &self.kind {
            ProblemKind::StochasticQuadratic { .. } => {
                Err(Error::Unsupported("the quadratic has no labels".into()))
            }
            ProblemKind::TinyMlp { data, .. } => Ok((**data).clone()),
            ProblemKind::OnlineLogistic { .. } => {
                let mut rng = stream_rng(self.seed, EVALUATION_STREAM);
                let (inputs, labels) = (0..size)
                    .map(|_| match self.sample_from(&mut rng) {
                        Sample::Binary { features, label } => (features, label),
                        Sample::Class { .. } => unreachable!(),
                    })
                    .unzip();
                LabeledBatch::new(inputs, Labels::Binary(labels))
            }
            ProblemKind::SoftmaxLinear { class_means, .. } => {
                let k = class_means.len();
                let mut rng = stream_rng(self.seed, EVALUATION_STREAM);
                let (inputs, labels) = (0..size)
                    .map(|_| match self.sample_from(&mut rng) {
                        Sample::Class { features, class } => (features, one_hot(class, k)),
                        Sample::Binary { .. } => unreachable!(),
                    })
                    .unzip();
                LabeledBatch::new(inputs, Labels::OneHot(labels))
            }
        }
    }

    /// Fraction of `batch` classified correctly at `x`.
    pub fn accuracy(&self, x: &ParamVector<T>, batch: &LabeledBatch<T>) -> Result<T> {
        check_dims(self.dim(), x.len())?;
        if batch.is_empty() {
            return Err(Error::Input("empty batch".into()));
        }
        let p = x.as_slice();
        let correct = match (&self.kind, batch.labels()) {
            (ProblemKind::OnlineLogistic { .. }, Labels::Binary(y)) => {
                check_dims(p.len(), batch.feature_dim())?;
                count_binary(batch.inputs(), y, |a| dot(p, a))
            }
            (ProblemKind::TinyMlp { shape, .. }, Labels::Binary(y)) => {
                check_dims(shape.input, batch.feature_dim())?;
                count_binary(batch.inputs(), y, |a| shape.logit(p, a))
            }
            (ProblemKind::SoftmaxLinear { class_means, .. }, Labels::OneHot(y)) => {
                let dim = class_means[0].len();
                check_dims(dim, batch.feature_dim())?;
                batch
                    .inputs()
                    .iter()
                    .zip(y)
                    .filter(|(a, row)| {
                        let logits: Vec<T> = p.chunks(dim).map(|w| dot(w, a)).collect();
                        argmax(&logits) == argmax(row)
                    })
                    .count()
            }
            (ProblemKind::StochasticQuadratic { .. }, _) => {
                return Err(Error::Unsupported("the quadratic has no labels".into()))
            }
            _ => return Err(Error::Input("label type does not match the problem".into())),
        };
        Ok(T::lit(correct as f64) / T::lit(batch.len() as f64))
    }
}

/// Relative error `‖a − n‖ / max(‖a‖, ‖n‖, 1e-12)` between the analytic
/// gradient at `(x, t)` and central differences with step `h`.
pub fn gradient_check(problem: &ProblemInstance<f64>, x: &ParamVector<f64>, t: u64, h: f64) -> Result<f64> {
    let (_, analytic) = problem.loss_and_grad(x, t)?;
    let mut numeric = Vec::with_capacity(x.len());
    let mut probe = x.as_slice().to_vec();
    for i in 0..x.len() {
        let xi = probe[i];
        probe[i] = xi + h;
        let up = problem.loss_at(&ParamVector::new(probe.clone())?, t)?;
        probe[i] = xi - h;
        let down = problem.loss_at(&ParamVector::new(probe.clone())?, t)?;
        probe[i] = xi;
        numeric.push((up - down) / (2.0 * h));
    }
    let numeric = ParamVector::new(numeric)?;
    let scale = analytic.norm().max(numeric.norm()).max(1e-12);
    Ok(analytic.sub(&numeric)?.norm() / scale)
}

fn center_range<T: Scalar>(centers: &CenterStream<T>, n: usize) -> (Vec<T>, Vec<T>) {
    match centers {
        CenterStream::Uniform { mean, spread } => (
            mean.iter().map(|&m| m - *spread).collect(),
            mean.iter().map(|&m| m + *spread).collect(),
        ),
        CenterStream::Cycle(list) => {
            let mut lo = vec![T::infinity(); n];
            let mut hi = vec![T::neg_infinity(); n];
            for c in list {
                for i in 0..n {
                    lo[i] = lo[i].min(c[i]);
                    hi[i] = hi[i].max(c[i]);
                }
            }
            (lo, hi)
        }
    }
}

fn linear_loss_grad<T: Scalar>(x: &[T], sample: &Sample<T>) -> (T, Vec<T>) {
    match sample {
        Sample::Binary { features, label } => {
            let s = dot(x, features);
            let r = sigmoid(s) - *label;
            (loss::bce_with_logit(s, *label), features.iter().map(|&a| r * a).collect())
        }
        Sample::Class { features, class } => {
            let dim = features.len();
            let logits: Vec<T> = x.chunks(dim).map(|w| dot(w, features)).collect();
            let (probs, lse) = softmax(&logits);
            let mut grad = Vec::with_capacity(x.len());
            for (k, &p) in probs.iter().enumerate() {
                let r = if k == *class { p - T::one() } else { p };
                grad.extend(features.iter().map(|&a| r * a));
            }
            (lse - logits[*class], grad)
        }
    }
}

fn averaged_loss_grad<T: Scalar>(x: &[T], samples: &[Sample<T>]) -> (T, Vec<T>) {
    let mut loss = T::zero();
    let mut grad = vec![T::zero(); x.len()];
    for s in samples {
        let (l, g) = linear_loss_grad(x, s);
        loss = loss + l;
        for (acc, gi) in grad.iter_mut().zip(g) {
            *acc = *acc + gi;
        }
    }
    let inv = T::one() / T::lit(samples.len() as f64);
    (loss * inv, grad.into_iter().map(|g| g * inv).collect())
}

fn count_binary<T: Scalar>(inputs: &[Vec<T>], labels: &[T], logit: impl Fn(&[T]) -> T) -> usize {
    inputs
        .iter()
        .zip(labels)
        .filter(|(a, &y)| {
            let predicted = if logit(a) >= T::zero() { T::one() } else { T::zero() };
            predicted == y
        })
        .count()
}

fn argmax<T: Scalar>(values: &[T]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, T::neg_infinity()), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) })
        .0
}

fn one_hot<T: Scalar>(class: usize, k: usize) -> Vec<T> {
    (0..k).map(|i| if i == class { T::one() } else { T::zero() }).collect()
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
