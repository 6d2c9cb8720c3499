use super::{new_table, resolve, Engine, Resolved, SolverConfig, StepSchedule};
use crate::error::Result;
use crate::geometry::{GeometryBundle, ProxScratch};
use crate::operator::{ComponentTable, FiniteSumOperator};
use crate::problems::ProblemInstance;
use crate::sampling::{RngStream, SamplingPlan, Side};

/// Sparse-update implementation.
///
/// Block `b` of `z` is materialized up to the step-size sum `caught_up[b]`:
/// the true `z` at sum `A` is `z[b] + (A − caught_up[b]) · S[b]`, valid as
/// long as `S[b]` has not changed since. Blocks are brought forward right
/// before they are read, written, or before their slice of `S` changes.
pub struct LazyRem<'a> {
    op: &'a dyn FiniteSumOperator,
    geom: &'a GeometryBundle,
    anchor: &'a [f64],
    plan: &'a SamplingPlan,
    schedule: StepSchedule,
    table: ComponentTable,
    rng: RngStream,
    z: Vec<f64>,
    x: Vec<f64>,
    caught_up: Vec<f64>,
    dirty: Vec<bool>,
    phase_mark: Vec<u64>,
    phase: u64,
    touch_mark: Vec<u64>,
    touched: usize,
    blocks: Vec<usize>,
    buf: Vec<f64>,
    snapshot: Vec<f64>,
    snapshot_z: Vec<f64>,
    snapshot_valid: bool,
    scratch: ProxScratch,
    oracle_calls: u64,
    max_abs: f64,
}

impl<'a> LazyRem<'a> {
    pub fn new(problem: &'a ProblemInstance, plan: &'a SamplingPlan, config: &SolverConfig) -> Result<Self> {
        let config = SolverConfig { mode: super::Mode::Lazy, ..config.clone() };
        let resolved = resolve(problem, plan, &config)?;
        Self::with_resolved(problem, plan, &config, &resolved)
    }

    pub(crate) fn with_resolved(
        problem: &'a ProblemInstance,
        plan: &'a SamplingPlan,
        config: &SolverConfig,
        resolved: &Resolved,
    ) -> Result<Self> {
        let schedule = StepSchedule::new(resolved.lpq, resolved.gamma, plan.q_min())?;
        let table = new_table(problem, config);
        let dim = problem.dim();
        let nb = problem.geometry.num_blocks();
        Ok(Self {
            op: problem.operator.as_ref(),
            geom: &problem.geometry,
            anchor: &problem.anchor,
            plan,
            schedule,
            table,
            rng: RngStream::new(config.seed),
            z: vec![0.0; dim],
            x: problem.anchor.clone(),
            caught_up: vec![0.0; nb],
            dirty: vec![false; nb],
            phase_mark: vec![0; nb],
            phase: 0,
            touch_mark: vec![0; nb],
            touched: 0,
            blocks: Vec::new(),
            buf: Vec::new(),
            snapshot: problem.anchor.clone(),
            snapshot_z: vec![0.0; dim],
            snapshot_valid: true,
            scratch: ProxScratch::default(),
            oracle_calls: problem.num_components() as u64,
            max_abs: 0.0,
        })
    }

    pub fn table(&self) -> &ComponentTable {
        &self.table
    }

    pub fn advance(&mut self) -> f64 {
        Engine::step(self)
    }

    /// The current iterate with every block caught up (state untouched).
    pub fn flushed(&mut self) -> &[f64] {
        Engine::point(self)
    }

    /// Distinct blocks containing `coords`, into `self.blocks`.
    fn collect_blocks(&mut self, coords: &[usize]) {
        self.phase += 1;
        self.blocks.clear();
        let k = self.schedule.k();
        for &i in coords {
            let b = self.geom.block_of(i);
            if self.phase_mark[b] != self.phase {
                self.phase_mark[b] = self.phase;
                self.blocks.push(b);
                if self.touch_mark[b] != k {
                    self.touch_mark[b] = k;
                    self.touched += self.geom.block(b).len();
                }
            }
        }
    }

    fn catch_up(&mut self, b: usize, target: f64) {
        let delta = target - self.caught_up[b];
        if delta != 0.0 {
            let s = self.table.aggregate();
            for &i in &self.geom.block(b).indices {
                self.z[i] += delta * s[i];
            }
            self.caught_up[b] = target;
            self.dirty[b] = true;
        }
    }

    fn materialize(&mut self, b: usize) {
        if self.dirty[b] {
            self.geom.prox_block_into(b, &self.z, self.caught_up[b], self.anchor, &mut self.x, &mut self.scratch);
            self.dirty[b] = false;
            for &i in &self.geom.block(b).indices {
                let v = self.x[i].abs();
                self.max_abs = if v.is_nan() || self.max_abs.is_nan() { f64::NAN } else { self.max_abs.max(v) };
            }
        }
    }

    /// Brings the blocks in `self.blocks` to `target` and materializes them.
    fn read_blocks(&mut self, target: f64) {
        for t in 0..self.blocks.len() {
            let b = self.blocks[t];
            self.catch_up(b, target);
            self.materialize(b);
        }
    }

    fn flush_all(&mut self) {
        let target = self.schedule.sum();
        for b in 0..self.geom.num_blocks() {
            self.catch_up(b, target);
        }
    }
}

impl Engine for LazyRem<'_> {
    fn step(&mut self) -> f64 {
        self.schedule.advance();
        let a_prev = self.schedule.a_prev();
        let sum_prev = self.schedule.sum_prev();
        let sum = self.schedule.sum();
        let k = self.schedule.k();
        self.touched = 0;
        self.max_abs = 0.0;
        self.snapshot_valid = false;

        // F_j(x_{k-1}) on the blocks it reads.
        let j = self.plan.sample(Side::P, &mut self.rng);
        let op = self.op;
        self.collect_blocks(op.input_support(j));
        self.read_blocks(sum_prev);
        let support = op.output_support(j);
        self.buf.resize(support.len(), 0.0);
        op.eval_component(j, &self.x, &mut self.buf);

        // z_k on the blocks F_j writes: a_k S_{k-1} by catch-up, plus the correction.
        self.collect_blocks(support);
        for t in 0..self.blocks.len() {
            let b = self.blocks[t];
            self.catch_up(b, sum);
        }
        let coef = a_prev / self.plan.p()[j];
        if coef != 0.0 {
            for ((&i, &v), &old) in support.iter().zip(&self.buf).zip(self.table.previous_value(j)) {
                self.z[i] += coef * (v - old);
            }
            for t in 0..self.blocks.len() {
                self.dirty[self.blocks[t]] = true;
            }
        }

        // F_{j'}(x_k) on the blocks it reads.
        let jq = self.plan.sample(Side::Q, &mut self.rng);
        self.collect_blocks(op.input_support(jq));
        self.read_blocks(sum);
        let support_q = op.output_support(jq);
        self.buf.resize(support_q.len(), 0.0);
        op.eval_component(jq, &self.x, &mut self.buf);

        // S changes on the output blocks of j'; settle them first.
        self.collect_blocks(support_q);
        for t in 0..self.blocks.len() {
            let b = self.blocks[t];
            self.catch_up(b, sum);
        }
        self.table.refresh(jq, &self.buf, k);
        if self.table.resum_due() {
            self.flush_all();
            self.table.resum();
        }
        self.oracle_calls += 2;
        self.max_abs
    }

    fn point(&mut self) -> &[f64] {
        if !self.snapshot_valid {
            let sum = self.schedule.sum();
            let s = self.table.aggregate();
            for b in 0..self.geom.num_blocks() {
                let delta = sum - self.caught_up[b];
                for &i in &self.geom.block(b).indices {
                    self.snapshot_z[i] = self.z[i] + delta * s[i];
                }
            }
            self.geom.prox_full(&self.snapshot_z, sum, self.anchor, &mut self.snapshot);
            self.snapshot_valid = true;
        }
        &self.snapshot
    }

    fn schedule(&self) -> &StepSchedule {
        &self.schedule
    }

    fn oracle_calls(&self) -> u64 {
        self.oracle_calls
    }

    fn touched(&self) -> usize {
        self.touched
    }
}
