//! Finite-sum operators, SAGA-style component tables and Lipschitz profiles.

use rand::Rng;

use crate::error::{ensure_finite, Error, Result};
use crate::geometry::GeometryBundle;

/// An operator `F = Σ_j F_j` on `R^d` whose components have fixed, declared
/// output and input supports.
///
/// `eval_component` writes values aligned with `output_support(j)`; it may
/// read only the coordinates listed in `input_support(j)`.
pub trait FiniteSumOperator: Send + Sync {
    fn dim(&self) -> usize;
    fn num_components(&self) -> usize;
    /// Sorted, duplicate-free coordinates written by component `j`.
    fn output_support(&self, j: usize) -> &[usize];
    /// Sorted, duplicate-free coordinates read by component `j`.
    fn input_support(&self, j: usize) -> &[usize];
    fn eval_component(&self, j: usize, x: &[f64], out: &mut [f64]);

    fn eval_full(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let mut buf = Vec::new();
        for j in 0..self.num_components() {
            let support = self.output_support(j);
            buf.resize(support.len(), 0.0);
            self.eval_component(j, x, &mut buf);
            for (&i, &v) in support.iter().zip(&buf) {
                out[i] += v;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseVec {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseVec {
    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            out[i] += v;
        }
        out
    }
}

fn check_point(op: &dyn FiniteSumOperator, x: &[f64]) -> Result<()> {
    if x.len() != op.dim() {
        return Err(Error::InvalidArgument(format!("point has length {}, operator dimension is {}", x.len(), op.dim())));
    }
    ensure_finite(x, "operator input")
}

/// Checked `F_j(x)`.
pub fn evaluate_component(op: &dyn FiniteSumOperator, j: usize, x: &[f64]) -> Result<SparseVec> {
    let m = op.num_components();
    if j >= m {
        return Err(Error::ComponentOutOfRange { index: j, m });
    }
    check_point(op, x)?;
    let indices = op.output_support(j).to_vec();
    let mut values = vec![0.0; indices.len()];
    op.eval_component(j, x, &mut values);
    Ok(SparseVec { indices, values })
}

/// Checked `F(x)`; costs `m` component calls in the accounting.
pub fn evaluate_full(op: &dyn FiniteSumOperator, x: &[f64]) -> Result<Vec<f64>> {
    check_point(op, x)?;
    let mut out = vec![0.0; op.dim()];
    op.eval_full(x, &mut out);
    Ok(out)
}

/// CSR-style list of index sets.
#[derive(Debug, Clone, Default, PartialEq)]
struct IndexLists {
    offsets: Vec<usize>,
    items: Vec<usize>,
}

impl IndexLists {
    fn new() -> Self {
        Self { offsets: vec![0], items: Vec::new() }
    }

    fn push(&mut self, items: &[usize]) {
        self.items.extend_from_slice(items);
        self.offsets.push(self.items.len());
    }

    #[inline]
    fn get(&self, j: usize) -> &[usize] {
        &self.items[self.offsets[j]..self.offsets[j + 1]]
    }

    #[inline]
    fn range(&self, j: usize) -> std::ops::Range<usize> {
        self.offsets[j]..self.offsets[j + 1]
    }
}

/// One linear term of an affine component: `out[slot] += coef · x[coord]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub slot: u32,
    pub coord: u32,
    pub coef: f64,
}

/// A finite-sum operator whose components are sparse affine maps
/// `F_j(x) = M_j x + c_j`.
///
/// All shipped problem families are of this form.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineOperator {
    dim: usize,
    outputs: IndexLists,
    inputs: IndexLists,
    constants: Vec<f64>,
    term_offsets: Vec<usize>,
    terms: Vec<Term>,
}

impl AffineOperator {
    pub fn builder(dim: usize) -> AffineOperatorBuilder {
        AffineOperatorBuilder {
            op: AffineOperator {
                dim,
                outputs: IndexLists::new(),
                inputs: IndexLists::new(),
                constants: Vec::new(),
                term_offsets: vec![0],
                terms: Vec::new(),
            },
        }
    }

    /// Linear terms of component `j`.
    pub fn terms(&self, j: usize) -> &[Term] {
        &self.terms[self.term_offsets[j]..self.term_offsets[j + 1]]
    }

    /// Constant part of component `j`, aligned with its output support.
    pub fn constants(&self, j: usize) -> &[f64] {
        &self.constants[self.outputs.range(j)]
    }

    /// Dense matrix of the summed linear part.
    pub fn linear_part(&self) -> nalgebra::DMatrix<f64> {
        let mut out = nalgebra::DMatrix::zeros(self.dim, self.dim);
        for j in 0..self.num_components() {
            let support = self.outputs.get(j);
            for t in self.terms(j) {
                out[(support[t.slot as usize], t.coord as usize)] += t.coef;
            }
        }
        out
    }

    /// Dense matrix of component `j`'s linear part.
    pub fn component_matrix(&self, j: usize) -> nalgebra::DMatrix<f64> {
        let mut out = nalgebra::DMatrix::zeros(self.dim, self.dim);
        let support = self.outputs.get(j);
        for t in self.terms(j) {
            out[(support[t.slot as usize], t.coord as usize)] += t.coef;
        }
        out
    }
}

pub struct AffineOperatorBuilder {
    op: AffineOperator,
}

impl AffineOperatorBuilder {
    /// Appends a component. `outputs` must be sorted and duplicate-free;
    /// `constants` is aligned with it and each term's slot indexes into it.
    pub fn push(&mut self, outputs: &[usize], constants: &[f64], terms: &[Term]) -> Result<()> {
        let dim = self.op.dim;
        if constants.len() != outputs.len() {
            return Err(Error::InvalidArgument("constants must align with the output support".into()));
        }
        if outputs.windows(2).any(|w| w[0] >= w[1]) || outputs.last().is_some_and(|&i| i >= dim) {
            return Err(Error::InvalidArgument("output support must be sorted, unique and in range".into()));
        }
        ensure_finite(constants, "component constants")?;
        let mut inputs = Vec::with_capacity(terms.len());
        for t in terms {
            if t.slot as usize >= outputs.len() || t.coord as usize >= dim {
                return Err(Error::InvalidArgument("term references an undeclared slot or coordinate".into()));
            }
            if !t.coef.is_finite() {
                return Err(Error::NonFinite("component coefficient"));
            }
            inputs.push(t.coord as usize);
        }
        inputs.sort_unstable();
        inputs.dedup();
        self.op.outputs.push(outputs);
        self.op.inputs.push(&inputs);
        self.op.constants.extend_from_slice(constants);
        self.op.terms.extend_from_slice(terms);
        self.op.term_offsets.push(self.op.terms.len());
        Ok(())
    }

    pub fn build(self) -> Result<AffineOperator> {
        if self.op.num_components() == 0 {
            return Err(Error::InvalidArgument("operator needs at least one component".into()));
        }
        Ok(self.op)
    }
}

impl FiniteSumOperator for AffineOperator {
    fn dim(&self) -> usize {
        self.dim
    }

    fn num_components(&self) -> usize {
        self.term_offsets.len() - 1
    }

    fn output_support(&self, j: usize) -> &[usize] {
        self.outputs.get(j)
    }

    fn input_support(&self, j: usize) -> &[usize] {
        self.inputs.get(j)
    }

    #[inline]
    fn eval_component(&self, j: usize, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(self.constants(j));
        for t in self.terms(j) {
            out[t.slot as usize] += t.coef * x[t.coord as usize];
        }
    }
}

/// How `F̃_{k-2, j}` is recovered when building the extrapolated operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShadowPolicy {
    /// Keep only the value overwritten by the most recent refresh. Exact.
    #[default]
    LastStep,
    /// Keep, per component, the value held before its latest overwrite.
    PerComponent,
}

/// Default number of refreshes between exact re-summations of the aggregate.
pub const RESUM_PERIOD: u64 = 1 << 16;

/// Stored component values `F̃_j`, their running sum and one level of history.
#[derive(Debug, Clone)]
pub struct ComponentTable {
    support: IndexLists,
    values: Vec<f64>,
    aggregate: Vec<f64>,
    stamps: Vec<u64>,
    policy: ShadowPolicy,
    last: Option<usize>,
    last_prev: Vec<f64>,
    prev: Vec<f64>,
    updates: u64,
    resum_period: u64,
}

impl ComponentTable {
    /// Evaluates every component at `x0` (m oracle calls).
    pub fn initialize(op: &dyn FiniteSumOperator, x0: &[f64], policy: ShadowPolicy) -> Self {
        let m = op.num_components();
        let mut support = IndexLists::new();
        for j in 0..m {
            support.push(op.output_support(j));
        }
        let mut values = vec![0.0; support.items.len()];
        let mut aggregate = vec![0.0; op.dim()];
        for j in 0..m {
            let r = support.range(j);
            op.eval_component(j, x0, &mut values[r.clone()]);
            for (&i, &v) in support.items[r.clone()].iter().zip(&values[r]) {
                aggregate[i] += v;
            }
        }
        let prev = if policy == ShadowPolicy::PerComponent { values.clone() } else { Vec::new() };
        Self {
            support,
            values,
            aggregate,
            stamps: vec![0; m],
            policy,
            last: None,
            last_prev: Vec::new(),
            prev,
            updates: 0,
            resum_period: RESUM_PERIOD,
        }
    }

    pub fn with_resum_period(mut self, period: u64) -> Self {
        self.resum_period = period.max(1);
        self
    }

    pub fn num_components(&self) -> usize {
        self.stamps.len()
    }

    pub fn support(&self, j: usize) -> &[usize] {
        self.support.get(j)
    }

    pub fn value(&self, j: usize) -> &[f64] {
        &self.values[self.support.range(j)]
    }

    /// `S = Σ_j F̃_j`.
    pub fn aggregate(&self) -> &[f64] {
        &self.aggregate
    }

    /// Iteration at which component `j` was last evaluated (0 = initialization).
    pub fn stamp(&self, j: usize) -> u64 {
        self.stamps[j]
    }

    /// The value of component `j` one refresh ago, per the shadow policy.
    pub fn previous_value(&self, j: usize) -> &[f64] {
        match self.policy {
            ShadowPolicy::LastStep if self.last == Some(j) => &self.last_prev,
            ShadowPolicy::LastStep => self.value(j),
            ShadowPolicy::PerComponent => &self.prev[self.support.range(j)],
        }
    }

    /// Replaces `F̃_j` with `new` (evaluated at iteration `k`) and updates `S`.
    pub fn refresh(&mut self, j: usize, new: &[f64], k: u64) {
        let r = self.support.range(j);
        match self.policy {
            ShadowPolicy::LastStep => {
                self.last_prev.clear();
                self.last_prev.extend_from_slice(&self.values[r.clone()]);
                self.last = Some(j);
            }
            ShadowPolicy::PerComponent => {
                self.prev[r.clone()].copy_from_slice(&self.values[r.clone()]);
            }
        }
        for ((&i, old), &v) in self.support.items[r.clone()].iter().zip(&mut self.values[r]).zip(new) {
            self.aggregate[i] += v - *old;
            *old = v;
        }
        self.stamps[j] = k;
        self.updates += 1;
    }

    pub fn resum_due(&self) -> bool {
        self.updates > 0 && self.updates.is_multiple_of(self.resum_period)
    }

    /// Recomputes `S` exactly from the stored values.
    pub fn resum(&mut self) {
        self.aggregate = self.explicit_sum();
    }

    pub fn explicit_sum(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.aggregate.len()];
        for (&i, &v) in self.support.items.iter().zip(&self.values) {
            s[i] += v;
        }
        s
    }
}

/// Per-component Lipschitz constants `λ = (L_1, …, L_m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzProfile {
    lambda: Vec<f64>,
}

impl LipschitzProfile {
    pub fn new(lambda: Vec<f64>) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::InvalidArgument("empty Lipschitz profile".into()));
        }
        ensure_finite(&lambda, "Lipschitz profile")?;
        if let Some(index) = lambda.iter().position(|&l| l <= 0.0) {
            return Err(Error::ZeroWeight { index });
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    pub fn norm_inf(&self) -> f64 {
        self.lambda.iter().fold(0.0, |m, &l| m.max(l))
    }

    pub fn norm_l2(&self) -> f64 {
        self.lambda.iter().map(|l| l * l).sum::<f64>().sqrt()
    }

    pub fn norm_l1(&self) -> f64 {
        self.lambda.iter().sum()
    }

    /// `(Σ_j √L_j)²`.
    pub fn norm_half(&self) -> f64 {
        let s: f64 = self.lambda.iter().map(|l| l.sqrt()).sum();
        s * s
    }
}

pub(crate) fn check_distribution(v: &[f64], m: usize, what: &str) -> Result<()> {
    if v.len() != m {
        return Err(Error::InvalidArgument(format!("{what} has {} entries, expected {m}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("probability vector"));
    }
    if let Some(index) = v.iter().position(|&x| x <= 0.0) {
        return Err(Error::ZeroWeight { index });
    }
    let s: f64 = v.iter().sum();
    if (s - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("{what} sums to {s}")));
    }
    Ok(())
}

/// `sqrt(Σ_j L_j² / (p_j q_j²))`.
pub fn lpq_bound(profile: &LipschitzProfile, p: &[f64], q: &[f64]) -> Result<f64> {
    let m = profile.len();
    check_distribution(p, m, "p")?;
    check_distribution(q, m, "q")?;
    Ok(profile
        .lambda
        .iter()
        .zip(p.iter().zip(q))
        .map(|(l, (p, q))| l * l / (p * q * q))
        .sum::<f64>()
        .sqrt())
}

fn sparse_dual_norm_sq(geom: &GeometryBundle, indices: &[usize], values: &[f64], acc: &mut Vec<(usize, f64)>) -> f64 {
    use crate::geometry::NormKind;
    acc.clear();
    for (&i, &v) in indices.iter().zip(values) {
        let b = geom.block_of(i);
        let block = geom.block(b);
        let contribution = match &block.norm {
            NormKind::Euclidean => v * v,
            NormKind::WeightedEuclidean(w) => v * v / w[geom.local_of(i)],
            NormKind::L1Entropy => v.abs(),
        };
        let is_max = matches!(block.norm, NormKind::L1Entropy);
        match acc.iter_mut().find(|(bb, _)| *bb == b) {
            Some((_, a)) if is_max => *a = a.max(contribution),
            Some((_, a)) => *a += contribution,
            None => acc.push((b, contribution)),
        }
    }
    acc.iter()
        .map(|&(b, a)| if matches!(geom.block(b).norm, NormKind::L1Entropy) { a * a } else { a })
        .sum()
}

fn random_pair<R: Rng + ?Sized>(geom: &GeometryBundle, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let x = geom.random_point(rng);
    let mut y = geom.random_point(rng);
    // Every other pair differs in a single block, which is where the
    // per-component ratios tend to peak.
    if rng.gen_bool(0.5) && geom.num_blocks() > 1 {
        let keep = rng.gen_range(0..geom.num_blocks());
        for (b, block) in geom.blocks().iter().enumerate() {
            if b != keep {
                for &i in &block.indices {
                    y[i] = x[i];
                }
            }
        }
    }
    (x, y)
}

/// Sampled lower estimate of `L_{p,q}` over random feasible pairs.
pub fn lpq_empirical<R: Rng + ?Sized>(
    op: &dyn FiniteSumOperator,
    geom: &GeometryBundle,
    p: &[f64],
    q: &[f64],
    trials: usize,
    rng: &mut R,
) -> Result<f64> {
    let m = op.num_components();
    check_distribution(p, m, "p")?;
    check_distribution(q, m, "q")?;
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    let (mut fx, mut fy, mut acc) = (Vec::new(), Vec::new(), Vec::new());
    let mut best: Option<f64> = None;
    for _ in 0..trials {
        let (x, y) = random_pair(geom, rng);
        let diff: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        let dist_sq = geom.norm_sq(&diff);
        if dist_sq <= 0.0 {
            continue;
        }
        let mut num = 0.0;
        for j in 0..m {
            let support = op.output_support(j);
            fx.resize(support.len(), 0.0);
            fy.resize(support.len(), 0.0);
            op.eval_component(j, &x, &mut fx);
            op.eval_component(j, &y, &mut fy);
            let delta: Vec<f64> = fx.iter().zip(&fy).map(|(a, b)| a - b).collect();
            num += sparse_dual_norm_sq(geom, support, &delta, &mut acc) / (p[j] * q[j] * q[j]);
        }
        let ratio = (num / dist_sq).sqrt();
        best = Some(best.map_or(ratio, |b: f64| b.max(ratio)));
    }
    best.ok_or_else(|| Error::InvalidArgument("all sampled pairs were degenerate".into()))
}

/// Sampled lower estimate of the full-operator Lipschitz constant.
pub fn lipschitz_empirical<R: Rng + ?Sized>(
    op: &dyn FiniteSumOperator,
    geom: &GeometryBundle,
    trials: usize,
    rng: &mut R,
) -> Result<f64> {
    let d = op.dim();
    let (mut fx, mut fy) = (vec![0.0; d], vec![0.0; d]);
    let mut best: Option<f64> = None;
    for _ in 0..trials {
        let (x, y) = random_pair(geom, rng);
        let diff: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        let dist_sq = geom.norm_sq(&diff);
        if dist_sq <= 0.0 {
            continue;
        }
        op.eval_full(&x, &mut fx);
        op.eval_full(&y, &mut fy);
        let delta: Vec<f64> = fx.iter().zip(&fy).map(|(a, b)| a - b).collect();
        let ratio = (geom.dual_norm_sq(&delta) / dist_sq).sqrt();
        best = Some(best.map_or(ratio, |b: f64| b.max(ratio)));
    }
    best.ok_or_else(|| Error::InvalidArgument("all sampled pairs were degenerate".into()))
}
