use super::{new_table, resolve, Engine, Resolved, SolverConfig, StepSchedule};
use crate::error::Result;
use crate::geometry::GeometryBundle;
use crate::operator::{ComponentTable, FiniteSumOperator};
use crate::problems::ProblemInstance;
use crate::sampling::{RngStream, SamplingPlan, Side};

/// Reference implementation: full `z` update and full prox every iteration.
pub struct DenseRem<'a> {
    op: &'a dyn FiniteSumOperator,
    geom: &'a GeometryBundle,
    anchor: &'a [f64],
    plan: &'a SamplingPlan,
    schedule: StepSchedule,
    table: ComponentTable,
    rng: RngStream,
    z: Vec<f64>,
    x: Vec<f64>,
    buf: Vec<f64>,
    oracle_calls: u64,
}

impl<'a> DenseRem<'a> {
    pub fn new(problem: &'a ProblemInstance, plan: &'a SamplingPlan, config: &SolverConfig) -> Result<Self> {
        let resolved = resolve(problem, plan, config)?;
        Self::with_resolved(problem, plan, config, &resolved)
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
            buf: Vec::new(),
            oracle_calls: problem.num_components() as u64,
        })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn table(&self) -> &ComponentTable {
        &self.table
    }

    pub fn rng(&self) -> &RngStream {
        &self.rng
    }

    pub fn advance(&mut self) -> f64 {
        Engine::step(self)
    }
}

impl Engine for DenseRem<'_> {
    fn step(&mut self) -> f64 {
        let a = self.schedule.advance();
        let a_prev = self.schedule.a_prev();
        let k = self.schedule.k();

        let j = self.plan.sample(Side::P, &mut self.rng);
        let support = self.op.output_support(j);
        self.buf.resize(support.len(), 0.0);
        self.op.eval_component(j, &self.x, &mut self.buf);
        let coef = a_prev / self.plan.p()[j];

        for (z, s) in self.z.iter_mut().zip(self.table.aggregate()) {
            *z += a * s;
        }
        for ((&i, &v), &old) in support.iter().zip(&self.buf).zip(self.table.previous_value(j)) {
            self.z[i] += coef * (v - old);
        }
        self.geom.prox_full(&self.z, self.schedule.sum(), self.anchor, &mut self.x);

        let jq = self.plan.sample(Side::Q, &mut self.rng);
        self.buf.resize(self.op.output_support(jq).len(), 0.0);
        self.op.eval_component(jq, &self.x, &mut self.buf);
        self.table.refresh(jq, &self.buf, k);
        if self.table.resum_due() {
            self.table.resum();
        }
        self.oracle_calls += 2;
        super::max_abs(&self.x)
    }

    fn point(&mut self) -> &[f64] {
        &self.x
    }

    fn schedule(&self) -> &StepSchedule {
        &self.schedule
    }

    fn oracle_calls(&self) -> u64 {
        self.oracle_calls
    }

    fn touched(&self) -> usize {
        self.x.len()
    }
}
