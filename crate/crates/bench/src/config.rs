//! Run configuration: a flat `key = value` file plus command-line overrides,
//! both funnelled through [`RunConfig::set`].

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use coba::{Beta1Schedule, FeasibleSet, HyperParams, OptimizerName, ProblemInstance, StepSizeSchedule};
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemFamily {
    Quadratic,
    Logistic,
    Softmax,
    Mlp,
}

impl FromStr for ProblemFamily {
    type Err = crate::BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quadratic" => Ok(Self::Quadratic),
            "logistic" => Ok(Self::Logistic),
            "softmax" => Ok(Self::Softmax),
            "mlp" => Ok(Self::Mlp),
            other => Err(config_err(format!("unknown problem `{other}`"))),
        }
    }
}

impl fmt::Display for ProblemFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Quadratic => "quadratic",
            Self::Logistic => "logistic",
            Self::Softmax => "softmax",
            Self::Mlp => "mlp",
        })
    }
}

/// `full`, `box:B` (the cube `[−B, B]^N`) or `ball:r` (centred at the origin).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum FeasibleSpec {
    Full,
    Box(f64),
    Ball(f64),
}

impl FeasibleSpec {
    pub fn build(self, n: usize) -> Result<FeasibleSet<f64>> {
        Ok(match self {
            FeasibleSpec::Full => FeasibleSet::FullSpace,
            FeasibleSpec::Box(b) => FeasibleSet::symmetric_box(n, b)?,
            FeasibleSpec::Ball(r) => FeasibleSet::new_ball(coba::ParamVector::zeros(n), r)?,
        })
    }
}

impl FromStr for FeasibleSpec {
    type Err = crate::BenchError;

    fn from_str(s: &str) -> Result<Self> {
        let radius = |v: &str| -> Result<f64> {
            let r: f64 = parse_num("feasible", v)?;
            if r.is_finite() && r > 0.0 {
                Ok(r)
            } else {
                Err(config_err(format!("feasible bound must be positive, got {v}")))
            }
        };
        match s.split_once(':') {
            None if s == "full" => Ok(FeasibleSpec::Full),
            Some(("box", v)) => Ok(FeasibleSpec::Box(radius(v)?)),
            Some(("ball", v)) => Ok(FeasibleSpec::Ball(radius(v)?)),
            _ => Err(config_err(format!("feasible set must be full, box:B or ball:r, got `{s}`"))),
        }
    }
}

impl fmt::Display for FeasibleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeasibleSpec::Full => f.write_str("full"),
            FeasibleSpec::Box(b) => write!(f, "box:{b}"),
            FeasibleSpec::Ball(r) => write!(f, "ball:{r}"),
        }
    }
}

/// How `wall_clock_ns` is filled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClockMode {
    /// Nanoseconds since the run started, from a monotonic clock.
    Monotonic,
    /// The step counter, which makes whole traces reproducible byte for byte.
    Logical,
}

impl FromStr for ClockMode {
    type Err = crate::BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "monotonic" => Ok(Self::Monotonic),
            "logical" => Ok(Self::Logical),
            other => Err(config_err(format!("clock must be monotonic or logical, got `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemFamily,
    /// Parameter dimension for the quadratic and logistic, feature dimension for softmax.
    pub dim: usize,
    pub classes: usize,
    pub hidden: usize,
    pub optimizer: OptimizerName,
    pub hyper: HyperParams<f64>,
    pub lambda: f64,
    pub steps: u64,
    /// When set, overrides `steps` with `epochs × steps_per_epoch`.
    pub epochs: Option<u64>,
    pub seed: u64,
    pub feasible: FeasibleSpec,
    pub theory: bool,
    pub out: Option<PathBuf>,
    pub clock: ClockMode,
    /// Accept `M = 0` or `a ≤ 1` for CoBA (the AMSGrad-equivalence override).
    pub allow_degenerate: bool,
    /// Held-out points used for the accuracy of the linear models.
    pub eval_size: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: ProblemFamily::Quadratic,
            dim: 10,
            classes: 3,
            hidden: 16,
            optimizer: "coba-hz".parse().expect("roster name"),
            hyper: HyperParams::default(),
            lambda: 2.0,
            steps: 1000,
            epochs: None,
            seed: 0,
            feasible: FeasibleSpec::Box(10.0),
            theory: false,
            out: None,
            clock: ClockMode::Monotonic,
            allow_degenerate: false,
            eval_size: 1000,
        }
    }
}

fn parse_num<N: FromStr>(key: &str, value: &str) -> Result<N> {
    value
        .parse()
        .map_err(|_| config_err(format!("`{key}` expects a number, got `{value}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(config_err(format!("`{key}` expects true or false, got `{value}`"))),
    }
}

impl RunConfig {
    /// Every key accepted by [`RunConfig::set`].
    pub const KEYS: [&'static str; 22] = [
        "opt", "problem", "dim", "classes", "hidden", "T", "epochs", "seed", "alpha", "schedule",
        "beta1", "beta1_decay", "beta2", "eps", "M", "a", "lambda", "rho", "feasible", "theory",
        "clock", "allow_degenerate",
    ];

    /// Parses a `key = value` file; `#` starts a comment.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut config = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("line {}: expected key = value", n + 1)))?;
            config.set(key.trim(), value.trim())?;
        }
        Ok(config)
    }

    /// Applies one setting. Unknown keys are errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let h = &mut self.hyper;
        match key {
            "opt" => self.optimizer = value.parse().map_err(|e: coba::Error| config_err(e.to_string()))?,
            "problem" => self.problem = value.parse()?,
            "dim" => self.dim = parse_num(key, value)?,
            "classes" => self.classes = parse_num(key, value)?,
            "hidden" => self.hidden = parse_num(key, value)?,
            "T" | "steps" => self.steps = parse_num(key, value)?,
            "epochs" => self.epochs = Some(parse_num(key, value)?),
            "seed" => self.seed = parse_num(key, value)?,
            "alpha" => {
                let alpha = parse_num(key, value)?;
                h.step = match h.step {
                    StepSizeSchedule::Constant { .. } => StepSizeSchedule::Constant { alpha },
                    StepSizeSchedule::DiminishingSqrt { .. } => StepSizeSchedule::DiminishingSqrt { alpha },
                };
            }
            "schedule" => {
                let alpha = h.step.alpha();
                h.step = match value {
                    "constant" => StepSizeSchedule::Constant { alpha },
                    "sqrt" => StepSizeSchedule::DiminishingSqrt { alpha },
                    _ => return Err(config_err(format!("schedule must be constant or sqrt, got `{value}`"))),
                };
            }
            "beta1" => {
                let beta1 = parse_num(key, value)?;
                h.beta1 = match h.beta1 {
                    Beta1Schedule::Constant { .. } => Beta1Schedule::Constant { beta1 },
                    Beta1Schedule::GeometricDecay { decay, .. } => Beta1Schedule::GeometricDecay { beta1, decay },
                };
            }
            "beta1_decay" => {
                let decay: f64 = parse_num(key, value)?;
                let beta1 = h.beta1.beta1();
                h.beta1 = if decay == 1.0 {
                    Beta1Schedule::Constant { beta1 }
                } else {
                    Beta1Schedule::GeometricDecay { beta1, decay }
                };
            }
            "beta2" => h.beta2 = parse_num(key, value)?,
            "eps" => h.eps = parse_num(key, value)?,
            "M" => h.damping = parse_num(key, value)?,
            "a" => h.damping_exponent = parse_num(key, value)?,
            "lambda" => self.lambda = parse_num(key, value)?,
            "rho" => h.rho = parse_num(key, value)?,
            "feasible" => self.feasible = value.parse()?,
            "theory" => self.theory = parse_bool(key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "clock" => self.clock = value.parse()?,
            "allow_degenerate" => self.allow_degenerate = parse_bool(key, value)?,
            "eval_size" => self.eval_size = parse_num(key, value)?,
            _ => return Err(config_err(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Hyperparameters with the optimizer's γ kind folded in.
    pub fn resolved_hyper(&self) -> Result<HyperParams<f64>> {
        let mut h = self.hyper;
        if let Some(kind) = self.optimizer.gamma_kind(self.lambda)? {
            h.gamma_kind = kind;
        }
        Ok(h)
    }

    pub fn build_problem(&self) -> Result<ProblemInstance<f64>> {
        let seed = self.seed;
        Ok(match self.problem {
            ProblemFamily::Quadratic => {
                ProblemInstance::quadratic(self.dim, self.feasible.build(self.dim)?, seed)?
            }
            ProblemFamily::Logistic => ProblemInstance::logistic(self.dim, self.feasible.build(self.dim)?, seed)?,
            ProblemFamily::Softmax => {
                let n = self.classes * self.dim;
                ProblemInstance::softmax(self.classes, self.dim, self.feasible.build(n)?, seed)?
            }
            ProblemFamily::Mlp => {
                let n = coba::problems::MlpShape {
                    input: 2,
                    hidden: self.hidden,
                    activation: coba::problems::Activation::Tanh,
                }
                .param_count();
                ProblemInstance::tiny_mlp(self.hidden, self.feasible.build(n)?, seed)?
            }
        })
    }

    /// Steps the run will take on `problem`.
    pub fn horizon(&self, steps_per_epoch: u64) -> u64 {
        self.epochs.map_or(self.steps, |e| e * steps_per_epoch)
    }

    /// Checks that do not need the problem instance.
    pub fn validate(&self) -> Result<()> {
        if self.epochs.is_none() && self.steps == 0 || self.epochs == Some(0) {
            return Err(config_err("T must be at least 1"));
        }
        let h = self.resolved_hyper()?;
        if self.allow_degenerate {
            h.validate_relaxed()?;
        } else {
            h.validate()?;
        }
        if self.theory {
            if self.problem == ProblemFamily::Mlp {
                return Err(config_err("theory checks need a convex problem"));
            }
            if self.feasible == FeasibleSpec::Full {
                return Err(config_err("theory checks need a bounded feasible set"));
            }
            h.validate_for_theory().map_err(|e| config_err(e.to_string()))?;
        }
        if self.eval_size == 0 {
            return Err(config_err("eval_size must be positive"));
        }
        Ok(())
    }

    /// Every setting in effect, keyed as in the config file.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let h = self.resolved_hyper().unwrap_or(self.hyper);
        let schedule = if h.step.is_diminishing_sqrt() { "sqrt" } else { "constant" };
        let decay = match h.beta1 {
            Beta1Schedule::Constant { .. } => 1.0,
            Beta1Schedule::GeometricDecay { decay, .. } => decay,
        };
        let mut map = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            map.insert(k.to_string(), v);
        };
        put("opt", self.optimizer.to_string());
        put("problem", self.problem.to_string());
        put("dim", self.dim.to_string());
        put("classes", self.classes.to_string());
        put("hidden", self.hidden.to_string());
        put("T", self.steps.to_string());
        put("epochs", self.epochs.map_or_else(|| "none".into(), |e| e.to_string()));
        put("seed", self.seed.to_string());
        put("alpha", format!("{:?}", h.step.alpha()));
        put("schedule", schedule.into());
        put("beta1", format!("{:?}", h.beta1.beta1()));
        put("beta1_decay", format!("{decay:?}"));
        put("beta2", format!("{:?}", h.beta2));
        put("eps", format!("{:?}", h.eps));
        put("M", format!("{:?}", h.damping));
        put("a", format!("{:?}", h.damping_exponent));
        put("lambda", format!("{:?}", self.lambda));
        put("rho", format!("{:?}", h.rho));
        put("feasible", self.feasible.to_string());
        put("theory", self.theory.to_string());
        put("clock", format!("{:?}", self.clock).to_lowercase());
        put("allow_degenerate", self.allow_degenerate.to_string());
        put("eval_size", self.eval_size.to_string());
        put("gamma_kind", h.gamma_kind.to_string());
        map
    }

    /// File stem shared by the CSV and JSON outputs.
    pub fn stem(&self) -> String {
        format!("{}-{}-s{}", self.problem, self.optimizer, self.seed)
    }
}
