//! Conjugate-gradient-based Adam (CoBA) and its adaptive baselines.
//!
//! The crate is generic over the scalar type ([`Scalar`] is implemented for
//! `f32` and `f64`); the aliases below fix the common `f64` instantiations.

// `!(x > 0)` is used deliberately so that NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cg;
pub mod error;
pub mod feasible;
pub mod optim;
pub mod problems;
pub mod scalar;
pub mod theory;
pub mod vecmath;

pub use cg::{cg_direction, damping, gamma, CgContext, GammaKind};
pub use error::{Error, Result};
pub use feasible::{Diameter, FeasibleSet};
pub use optim::{
    adagrad_step, adam_step, amsgrad_step, coba_step, rmsprop_step, sgd_step, Beta1Schedule,
    HyperParams, Method, Optimizer, OptimizerName, OptimizerState, StepInfo, StepSizeSchedule,
};
pub use problems::{ProblemInstance, ProblemKind};
pub use scalar::Scalar;
pub use theory::{BoundReport, TheoryReport, TheoryTrace};
pub use vecmath::{elemwise_max, elemwise_square, inner, metric_norm, norm_inf, DiagMetric, ParamVector};

pub type Vector = ParamVector<f64>;
pub type Vector32 = ParamVector<f32>;
pub type Metric = DiagMetric<f64>;
pub type Set = FeasibleSet<f64>;
pub type Hyper = HyperParams<f64>;
pub type Hyper32 = HyperParams<f32>;
pub type Gamma = GammaKind<f64>;
pub type Optimizer64 = Optimizer<f64>;
pub type Optimizer32 = Optimizer<f32>;
pub type Problem = ProblemInstance<f64>;
pub type Trace = TheoryTrace<f64>;
