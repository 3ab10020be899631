//! One optimizer run: per-step rows, a summary and, for convex problems, the
//! regret-bound report.

use std::collections::BTreeMap;
use std::time::Instant;

use coba::theory::{verify, TheoryReport, TheoryTrace};
use coba::{HyperParams, Optimizer, ProblemInstance, ProblemKind};
use serde::{Deserialize, Serialize};

use crate::config::{ClockMode, RunConfig};
use crate::error::{config_err, Result};

/// Lags checked by the moment-sum lemma.
pub const MOMENT_LAGS: [usize; 3] = [0, 1, 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub t: u64,
    pub alpha_t: f64,
    /// `f_t(x_t)`, evaluated before the step.
    pub loss: f64,
    pub cum_loss: f64,
    pub regret: Option<f64>,
    /// Last evaluated accuracy, carried forward between epoch ends.
    pub accuracy: Option<f64>,
    pub gamma: f64,
    pub dnorm: f64,
    pub wall_clock_ns: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub optimizer: String,
    pub problem: String,
    pub steps: u64,
    pub steps_per_epoch: u64,
    /// Mean per-step loss over the last epoch (or the whole run if shorter).
    pub final_loss: f64,
    pub final_accuracy: Option<f64>,
    /// First epoch whose closing accuracy is exactly 1.
    pub epochs_to_full_accuracy: Option<u64>,
    pub final_x: Vec<f64>,
    pub theory: Option<TheoryReport<f64>>,
    pub theory_passed: Option<bool>,
    pub config: BTreeMap<String, String>,
    pub hyper: HyperParams<f64>,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub rows: Vec<Row>,
    pub summary: Summary,
}

impl RunRecord {
    /// False only when theory checks ran and one failed.
    pub fn passed(&self) -> bool {
        self.summary.theory_passed != Some(false)
    }
}

/// Builds the problem from `config` and runs it.
pub fn run(config: &RunConfig) -> Result<RunRecord> {
    config.validate()?;
    let problem = config.build_problem()?;
    run_on(config, &problem)
}

/// Runs `config`'s optimizer on an explicit problem instance.
pub fn run_on(config: &RunConfig, problem: &ProblemInstance<f64>) -> Result<RunRecord> {
    config.validate()?;
    if config.theory && !problem.is_convex() {
        return Err(config_err("theory checks need a convex problem"));
    }
    let hyper = config.resolved_hyper()?;
    let method = config.optimizer.method;
    let x0 = problem.initial_point()?;
    let mut opt = if config.allow_degenerate {
        Optimizer::new_relaxed(method, hyper, x0)?
    } else {
        Optimizer::new(method, hyper, x0)?
    };

    let per_epoch = problem.steps_per_epoch();
    let horizon = config.horizon(per_epoch);
    let eval = match problem.kind() {
        ProblemKind::StochasticQuadratic { .. } => None,
        _ => Some(problem.evaluation_batch(config.eval_size)?),
    };
    // Streams other than the quadratic need an iterative solver for x*, so
    // their regret column is only filled when theory checks ask for it.
    let comparator = match problem.kind() {
        ProblemKind::StochasticQuadratic { .. } => Some(problem.comparator(horizon)?),
        ProblemKind::TinyMlp { .. } => None,
        _ if config.theory => Some(problem.comparator(horizon)?),
        _ => None,
    };

    let mut trace = config.theory.then(TheoryTrace::new);
    let mut rows = Vec::with_capacity(horizon as usize);
    let mut cum_loss = 0.0;
    let mut cum_best = 0.0;
    let mut comparator_losses = Vec::new();
    let mut accuracy = None;
    let mut epochs_to_full = None;
    let start = Instant::now();

    for t in 1..=horizon {
        let (loss, g) = problem.loss_and_grad(opt.x(), t)?;
        opt.step(&g, problem.feasible())?;
        cum_loss += loss;
        let regret = match &comparator {
            Some(best) => {
                let l = problem.loss_at(best, t)?;
                cum_best += l;
                comparator_losses.push(l);
                Some(cum_loss - cum_best)
            }
            None => None,
        };
        if let Some(tr) = trace.as_mut() {
            tr.record(&opt, &g, loss);
        }
        if let Some(batch) = &eval {
            if t % per_epoch == 0 || t == horizon {
                let acc = problem.accuracy(opt.x(), batch)?;
                if acc == 1.0 && epochs_to_full.is_none() && t % per_epoch == 0 {
                    epochs_to_full = Some(t / per_epoch);
                }
                accuracy = Some(acc);
            }
        }
        let info = *opt.state().last_step();
        let wall_clock_ns = match config.clock {
            ClockMode::Monotonic => start.elapsed().as_nanos() as u64,
            ClockMode::Logical => t,
        };
        rows.push(Row {
            t,
            alpha_t: info.alpha_t,
            loss,
            cum_loss,
            regret,
            accuracy,
            gamma: info.gamma,
            dnorm: info.direction_norm,
            wall_clock_ns,
        });
    }

    let theory = match trace {
        Some(mut tr) => {
            tr.set_comparator_losses(&comparator_losses)?;
            let diameter = problem.feasible().diameter_inf();
            Some(verify(&tr, &hyper, diameter, problem.gradient_bound()?, &MOMENT_LAGS)?)
        }
        None => None,
    };
    let tail = rows.len().min(per_epoch as usize);
    let final_loss = rows[rows.len() - tail..].iter().map(|r| r.loss).sum::<f64>() / tail as f64;
    let summary = Summary {
        optimizer: config.optimizer.to_string(),
        problem: problem.kind().name().to_string(),
        steps: horizon,
        steps_per_epoch: per_epoch,
        final_loss,
        final_accuracy: accuracy,
        epochs_to_full_accuracy: epochs_to_full,
        final_x: opt.x().to_f64_vec(),
        theory_passed: theory.as_ref().map(TheoryReport::all_hold),
        theory,
        config: config.echo(),
        hyper,
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    Ok(RunRecord { rows, summary })
}

