//! Full-operator reference methods: mirror-prox and Popov's method.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metrics::EvalRecord;
use crate::operator::lipschitz_empirical;
use crate::problems::ProblemInstance;
use crate::rem::{max_abs, EvalPoint, Trace};

/// Random pairs used for the Lipschitz estimate when no closed form exists.
pub const LIPSCHITZ_TRIALS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    MirrorProx,
    Popov,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::MirrorProx => "mirror-prox",
            Method::Popov => "popov",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineConfig {
    pub method: Method,
    /// Defaults to `1/L` (mirror-prox) or `1/(2L)` (Popov).
    pub step: Option<f64>,
    pub iterations: u64,
    /// 0 means every iteration.
    pub eval_stride: u64,
    /// Seeds the Lipschitz estimate only; both methods are deterministic.
    pub seed: u64,
    /// Defaults to the average when the regularizer is not strongly convex.
    pub eval_point: Option<EvalPoint>,
    pub divergence_bound: f64,
}

impl BaselineConfig {
    pub fn new(method: Method, iterations: u64) -> Self {
        Self { method, step: None, iterations, eval_stride: 0, seed: 0, eval_point: None, divergence_bound: 1e9 }
    }

    pub fn step(mut self, step: f64) -> Self {
        self.step = Some(step);
        self
    }

    pub fn stride(mut self, stride: u64) -> Self {
        self.eval_stride = stride;
        self
    }
}

/// Full-operator Lipschitz constant: the closed form when the family has
/// one, otherwise a sampled estimate.
pub fn full_lipschitz(problem: &ProblemInstance, seed: u64) -> Result<f64> {
    if let Some(l) = problem.full_lipschitz {
        return Ok(l);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    lipschitz_empirical(problem.operator.as_ref(), &problem.geometry, LIPSCHITZ_TRIALS, &mut rng)
}

pub fn default_step(problem: &ProblemInstance, method: Method, seed: u64) -> Result<f64> {
    let l = full_lipschitz(problem, seed)?;
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::InvalidArgument(format!("Lipschitz estimate {l} is not usable")));
    }
    Ok(match method {
        Method::MirrorProx => 1.0 / l,
        Method::Popov => 0.5 / l,
    })
}

/// Stepping state shared by both methods. Every prox step is anchored at
/// the current iterate with `A = η`.
pub struct BaselineEngine<'a> {
    problem: &'a ProblemInstance,
    method: Method,
    step: f64,
    x: Vec<f64>,
    /// Half point (mirror-prox) or extrapolation point (Popov).
    w: Vec<f64>,
    /// Popov's stored `F(w_{k-1})`.
    last: Option<Vec<f64>>,
    f: Vec<f64>,
    z: Vec<f64>,
    k: u64,
    oracle_calls: u64,
}

impl<'a> BaselineEngine<'a> {
    pub fn new(problem: &'a ProblemInstance, method: Method, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidArgument(format!("step size must be positive, got {step}")));
        }
        let d = problem.dim();
        Ok(Self {
            problem,
            method,
            step,
            x: problem.anchor.clone(),
            w: problem.anchor.clone(),
            last: None,
            f: vec![0.0; d],
            z: vec![0.0; d],
            k: 0,
            oracle_calls: 0,
        })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// The point whose average is reported.
    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn iteration(&self) -> u64 {
        self.k
    }

    pub fn oracle_calls(&self) -> u64 {
        self.oracle_calls
    }

    fn eval(&mut self, at_w: bool) {
        let point = if at_w { &self.w } else { &self.x };
        self.problem.operator.eval_full(point, &mut self.f);
        self.oracle_calls += self.problem.num_components() as u64;
    }

    /// `argmin ⟨η F, u⟩ + η g(u) + D(u, x)` with `F = self.f`, into `w` or `x`.
    fn prox(&mut self, into_w: bool) {
        for (z, f) in self.z.iter_mut().zip(&self.f) {
            *z = self.step * f;
        }
        let geom = &self.problem.geometry;
        if into_w {
            geom.prox_full(&self.z, self.step, &self.x, &mut self.w);
        } else {
            let anchor = self.x.clone();
            geom.prox_full(&self.z, self.step, &anchor, &mut self.x);
        }
    }

    /// One iteration; returns `max(‖x‖_∞, ‖w‖_∞)`.
    pub fn step(&mut self) -> f64 {
        self.k += 1;
        match self.method {
            Method::MirrorProx => {
                self.eval(false);
                self.prox(true);
                self.eval(true);
                self.prox(false);
            }
            Method::Popov => {
                // w_0 = x_0; afterwards w_k extrapolates with F(w_{k-1}).
                if let Some(last) = self.last.take() {
                    self.f.copy_from_slice(&last);
                    self.prox(true);
                    self.last = Some(last);
                }
                self.eval(true);
                self.last = Some(self.f.clone());
                self.prox(false);
            }
        }
        let (a, b) = (max_abs(&self.x), max_abs(&self.w));
        if a.is_nan() || b.is_nan() {
            f64::NAN
        } else {
            a.max(b)
        }
    }
}

/// Runs a baseline and records metrics like the REM solvers do.
pub fn run_baseline(problem: &ProblemInstance, config: &BaselineConfig) -> Result<Trace> {
    let step = match config.step {
        Some(s) => s,
        None => default_step(problem, config.method, config.seed)?,
    };
    let mut engine = BaselineEngine::new(problem, config.method, step)?;
    let eval_point = config.eval_point.unwrap_or(if problem.geometry.strong_convexity() > 0.0 {
        EvalPoint::Iterate
    } else {
        EvalPoint::Average
    });
    let stride = config.eval_stride.max(1);
    let d = problem.dim();
    let mut sum = vec![0.0; d];
    let mut count = 0u64;
    let start = Instant::now();
    let mut eval_time = Duration::ZERO;
    let mut records = Vec::new();

    let mut record = |k: u64, engine: &BaselineEngine, sum: &[f64], count: u64| {
        let t0 = Instant::now();
        let elapsed = start.elapsed().saturating_sub(eval_time);
        let metrics = match eval_point {
            EvalPoint::Iterate => problem.evaluate(engine.x()),
            EvalPoint::Average if count == 0 => problem.evaluate(&problem.anchor),
            EvalPoint::Average => {
                let avg: Vec<f64> = sum.iter().map(|s| s / count as f64).collect();
                problem.evaluate(&avg)
            }
        };
        eval_time += t0.elapsed();
        EvalRecord::new(k, engine.oracle_calls(), elapsed.as_nanos() as u64, metrics)
    };

    records.push(record(0, &engine, &sum, count));
    for k in 1..=config.iterations {
        let norm = engine.step();
        if !(norm <= config.divergence_bound) {
            return Err(Error::Diverged { iteration: k, norm, bound: config.divergence_bound });
        }
        for (s, w) in sum.iter_mut().zip(engine.w()) {
            *s += w;
        }
        count += 1;
        if k % stride == 0 || k == config.iterations {
            records.push(record(k, &engine, &sum, count));
        }
    }
    let x_bar = (count > 0).then(|| sum.iter().map(|s| s / count as f64).collect());
    Ok(Trace {
        records,
        iterations: config.iterations,
        oracle_calls: engine.oracle_calls(),
        x_final: engine.x().to_vec(),
        x_bar,
        step_sum: step * config.iterations as f64,
        steps_certified: 0,
        max_touched: d,
    })
}
