//! The randomized extrapolated method, in a dense reference form and a lazy
//! form that only touches the blocks read or written by the two sampled
//! components each iteration.

mod averaging;
mod dense;
mod lazy;
mod schedule;

use std::time::{Duration, Instant};

pub use averaging::draw_index_set;
pub use dense::DenseRem;
pub use lazy::LazyRem;
pub use schedule::{initial_step, StepSchedule, CERTIFICATE_RTOL};

use crate::error::{Error, Result};
use crate::metrics::EvalRecord;
use crate::operator::{ComponentTable, ShadowPolicy, RESUM_PERIOD};
use crate::problems::ProblemInstance;
use crate::sampling::SamplingPlan;
use averaging::Averager;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Dense,
    Lazy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Averaging {
    /// `Σ a_i x_i / A_K` over every iterate (dense only).
    WeightedFull,
    /// Plain mean over `⌈K/m⌉` iterations drawn up front.
    SampledIndexSet,
}

/// Which point the metrics are evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalPoint {
    Iterate,
    Average,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub iterations: u64,
    /// Strong convexity used by the schedule; defaults to the geometry's.
    pub gamma: Option<f64>,
    pub mode: Mode,
    /// Overrides the plan's `L_pq`.
    pub lpq: Option<f64>,
    /// Metrics every this many iterations (and at the last one); 0 means `m`.
    pub eval_stride: u64,
    pub seed: u64,
    /// Defaults to weighted-full in dense mode and the sampled set in lazy mode.
    pub averaging: Option<Averaging>,
    /// Defaults to the average when `γ = 0` and the iterate otherwise.
    pub eval_point: Option<EvalPoint>,
    /// Abort once `‖x_k‖_∞` exceeds this.
    pub divergence_bound: f64,
    pub certify_steps: bool,
    pub shadow: ShadowPolicy,
    pub resum_period: u64,
}

impl SolverConfig {
    pub fn new(iterations: u64, seed: u64) -> Self {
        Self {
            iterations,
            gamma: None,
            mode: Mode::Dense,
            lpq: None,
            eval_stride: 0,
            seed,
            averaging: None,
            eval_point: None,
            divergence_bound: 1e9,
            certify_steps: true,
            shadow: ShadowPolicy::LastStep,
            resum_period: RESUM_PERIOD,
        }
    }

    pub fn mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn stride(mut self, stride: u64) -> Self {
        self.eval_stride = stride;
        self
    }

    pub fn averaging(mut self, averaging: Averaging) -> Self {
        self.averaging = Some(averaging);
        self
    }

    pub fn eval_point(mut self, point: EvalPoint) -> Self {
        self.eval_point = Some(point);
        self
    }

    pub fn gamma(mut self, gamma: f64) -> Self {
        self.gamma = Some(gamma);
        self
    }
}

/// Output of a solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub records: Vec<EvalRecord>,
    pub iterations: u64,
    pub oracle_calls: u64,
    pub x_final: Vec<f64>,
    /// `None` when no iteration was run.
    pub x_bar: Option<Vec<f64>>,
    /// `A_K`.
    pub step_sum: f64,
    pub steps_certified: u64,
    /// Largest number of coordinates touched by a single iteration.
    pub max_touched: usize,
}

/// Settings resolved against a concrete instance and plan.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Resolved {
    pub gamma: f64,
    pub lpq: f64,
    pub stride: u64,
    pub averaging: Averaging,
    pub eval_point: EvalPoint,
}

pub(crate) fn resolve(problem: &ProblemInstance, plan: &SamplingPlan, config: &SolverConfig) -> Result<Resolved> {
    let m = problem.num_components();
    if plan.m() != m {
        return Err(Error::InvalidArgument(format!("plan has {} components, instance has {m}", plan.m())));
    }
    let geom_gamma = problem.geometry.strong_convexity();
    let gamma = config.gamma.unwrap_or(geom_gamma);
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!("gamma must be >= 0, got {gamma}")));
    }
    if gamma > geom_gamma * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "gamma {gamma} exceeds the regularizer's strong convexity {geom_gamma}"
        )));
    }
    let lpq = config.lpq.unwrap_or(plan.lpq());
    if !(lpq > 0.0 && lpq.is_finite()) {
        return Err(Error::InvalidArgument(format!("L_pq must be positive, got {lpq}")));
    }
    let averaging = config.averaging.unwrap_or(match config.mode {
        Mode::Dense => Averaging::WeightedFull,
        Mode::Lazy => Averaging::SampledIndexSet,
    });
    if config.mode == Mode::Lazy && averaging == Averaging::WeightedFull {
        return Err(Error::Unsupported("weighted-full averaging needs every iterate; use the sampled index set in lazy mode".into()));
    }
    let eval_point = config.eval_point.unwrap_or(if gamma == 0.0 { EvalPoint::Average } else { EvalPoint::Iterate });
    let stride = if config.eval_stride == 0 { m as u64 } else { config.eval_stride };
    if !(config.divergence_bound > 0.0) {
        return Err(Error::InvalidArgument("divergence bound must be positive".into()));
    }
    Ok(Resolved { gamma, lpq, stride, averaging, eval_point })
}

pub(crate) fn new_table(problem: &ProblemInstance, config: &SolverConfig) -> ComponentTable {
    ComponentTable::initialize(problem.operator.as_ref(), &problem.anchor, config.shadow)
        .with_resum_period(config.resum_period)
}

/// One solver variant as seen by the run loop.
pub(crate) trait Engine {
    /// Runs one iteration; returns the largest `|x_i|` it materialized.
    fn step(&mut self) -> f64;
    /// The current iterate, fully caught up.
    fn point(&mut self) -> &[f64];
    fn schedule(&self) -> &StepSchedule;
    fn oracle_calls(&self) -> u64;
    fn touched(&self) -> usize;
}

pub(crate) fn drive<E: Engine>(
    engine: &mut E,
    problem: &ProblemInstance,
    config: &SolverConfig,
    resolved: &Resolved,
) -> Result<Trace> {
    let dim = problem.dim();
    let k_max = config.iterations;
    let mut averager = match resolved.averaging {
        Averaging::WeightedFull => Averager::weighted(dim),
        Averaging::SampledIndexSet => {
            Averager::sampled(dim, draw_index_set(config.seed, k_max, problem.num_components()))
        }
    };
    let start = Instant::now();
    let mut eval_time = Duration::ZERO;
    let mut records = Vec::new();
    let mut steps_certified = 0;
    let mut max_touched = 0;

    let record = |k: u64, engine: &mut E, averager: &Averager, eval_time: &mut Duration| {
        let t0 = Instant::now();
        let elapsed = start.elapsed().saturating_sub(*eval_time);
        let metrics = match resolved.eval_point {
            EvalPoint::Iterate => problem.evaluate(engine.point()),
            EvalPoint::Average => match averager.current() {
                Some(avg) => problem.evaluate(&avg),
                None => problem.evaluate(&problem.anchor),
            },
        };
        *eval_time += t0.elapsed();
        EvalRecord::new(k, engine.oracle_calls(), elapsed.as_nanos() as u64, metrics)
    };

    records.push(record(0, engine, &averager, &mut eval_time));
    for k in 1..=k_max {
        let norm = engine.step();
        max_touched = max_touched.max(engine.touched());
        if !(norm <= config.divergence_bound) {
            return Err(Error::Diverged { iteration: k, norm, bound: config.divergence_bound });
        }
        if config.certify_steps {
            engine.schedule().certify()?;
            steps_certified += 1;
        }
        if averager.wants(k) {
            let a = engine.schedule().a();
            averager.add(a, engine.point());
        }
        if k % resolved.stride == 0 || k == k_max {
            records.push(record(k, engine, &averager, &mut eval_time));
        }
    }
    Ok(Trace {
        records,
        iterations: k_max,
        oracle_calls: engine.oracle_calls(),
        x_final: engine.point().to_vec(),
        x_bar: averager.current(),
        step_sum: engine.schedule().sum(),
        steps_certified,
        max_touched,
    })
}

/// `‖v‖_∞`, propagating NaN.
pub(crate) fn max_abs(v: &[f64]) -> f64 {
    let mut m = 0.0f64;
    for x in v {
        if x.is_nan() {
            return f64::NAN;
        }
        m = m.max(x.abs());
    }
    m
}

/// Runs the method in the mode selected by `config`.
pub fn run(problem: &ProblemInstance, plan: &SamplingPlan, config: &SolverConfig) -> Result<Trace> {
    match config.mode {
        Mode::Dense => run_dense(problem, plan, config),
        Mode::Lazy => run_lazy(problem, plan, config),
    }
}

pub fn run_dense(problem: &ProblemInstance, plan: &SamplingPlan, config: &SolverConfig) -> Result<Trace> {
    let resolved = resolve(problem, plan, &SolverConfig { mode: Mode::Dense, ..config.clone() })?;
    let mut engine = DenseRem::with_resolved(problem, plan, config, &resolved)?;
    drive(&mut engine, problem, config, &resolved)
}

pub fn run_lazy(problem: &ProblemInstance, plan: &SamplingPlan, config: &SolverConfig) -> Result<Trace> {
    let resolved = resolve(problem, plan, &SolverConfig { mode: Mode::Lazy, ..config.clone() })?;
    let mut engine = LazyRem::with_resolved(problem, plan, config, &resolved)?;
    drive(&mut engine, problem, config, &resolved)
}

/// `F̂ = S + (a_prev / (a p_j)) (F_j(x_prev) − F̃_{-,j})` as a dense vector.
pub fn extrapolate(table: &ComponentTable, j: usize, value_at_prev: &[f64], a_prev: f64, a: f64, p_j: f64) -> Vec<f64> {
    let mut out = table.aggregate().to_vec();
    let coef = a_prev / (a * p_j);
    for ((&i, &v), &old) in table.support(j).iter().zip(value_at_prev).zip(table.previous_value(j)) {
        out[i] += coef * (v - old);
    }
    out
}
