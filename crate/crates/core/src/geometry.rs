//! Block-separable norms, Bregman divergences and proximal subproblems.
//!
//! A [`GeometryBundle`] partitions the coordinates into blocks. Each block
//! carries a norm with its paired distance-generating function and a simple
//! regularizer, so the dual-averaging subproblem
//!
//! ```text
//! argmin_u  <z, u> + A g(u) + D(u, x0)
//! ```
//!
//! separates over blocks and has a closed form on every supported pairing:
//! (weighted) Euclidean with zero, quadratic or box regularizers, and the
//! ℓ1 norm with the entropy divergence on the probability simplex.

use rand::Rng;

use crate::error::{ensure_finite, Error, Result};

/// Tolerance used when validating domain membership of caller-supplied points.
pub const DOMAIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum NormKind {
    Euclidean,
    /// `‖u‖² = Σ w_i u_i²`, dual `Σ v_i² / w_i`.
    WeightedEuclidean(Vec<f64>),
    /// `ℓ1` primal, `ℓ∞` dual, entropy (KL) divergence.
    L1Entropy,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularizer {
    Zero,
    /// `g(u) = μ/2 ‖u‖²` in the block norm.
    Quadratic(f64),
    /// Indicator of `[lo, hi]` per coordinate.
    Box { lo: f64, hi: f64 },
    /// Indicator of the probability simplex.
    Simplex,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockGeometry {
    pub indices: Vec<usize>,
    pub norm: NormKind,
    pub regularizer: Regularizer,
}

impl BlockGeometry {
    pub fn euclidean(indices: Vec<usize>, regularizer: Regularizer) -> Self {
        Self { indices, norm: NormKind::Euclidean, regularizer }
    }

    pub fn weighted(indices: Vec<usize>, weights: Vec<f64>, regularizer: Regularizer) -> Self {
        Self { indices, norm: NormKind::WeightedEuclidean(weights), regularizer }
    }

    pub fn simplex(indices: Vec<usize>) -> Self {
        Self { indices, norm: NormKind::L1Entropy, regularizer: Regularizer::Simplex }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    #[inline]
    fn weight(&self, local: usize) -> f64 {
        match &self.norm {
            NormKind::WeightedEuclidean(w) => w[local],
            _ => 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.indices.is_empty() {
            return Err(Error::InvalidArgument("empty block".into()));
        }
        match (&self.norm, self.regularizer) {
            (NormKind::L1Entropy, Regularizer::Simplex) => {}
            (NormKind::L1Entropy, _) | (_, Regularizer::Simplex) => {
                return Err(Error::InvalidArgument(
                    "the entropy divergence pairs only with the simplex indicator".into(),
                ))
            }
            _ => {}
        }
        if let NormKind::WeightedEuclidean(w) = &self.norm {
            if w.len() != self.indices.len() {
                return Err(Error::InvalidArgument("weight count differs from block size".into()));
            }
            if w.iter().any(|&wi| !(wi > 0.0 && wi.is_finite())) {
                return Err(Error::InvalidArgument("weights must be strictly positive".into()));
            }
        }
        match self.regularizer {
            Regularizer::Quadratic(mu) if !(mu >= 0.0 && mu.is_finite()) => {
                Err(Error::InvalidArgument(format!("quadratic strength {mu} must be >= 0")))
            }
            Regularizer::Box { lo, hi } if !(lo <= hi && lo.is_finite() && hi.is_finite()) => {
                Err(Error::InvalidArgument(format!("invalid box [{lo}, {hi}]")))
            }
            _ => Ok(()),
        }
    }

    /// Anchor used when the caller does not supply one: uniform on simplexes,
    /// the origin (projected into the box) elsewhere.
    pub fn default_anchor(&self) -> Vec<f64> {
        let n = self.len();
        match self.regularizer {
            Regularizer::Simplex => vec![1.0 / n as f64; n],
            Regularizer::Box { lo, hi } => vec![0.0f64.clamp(lo, hi); n],
            _ => vec![0.0; n],
        }
    }

    /// Closed-form prox on block-local slices. Inputs are assumed valid.
    pub(crate) fn prox_local(&self, z: &[f64], a_sum: f64, anchor: &[f64], out: &mut [f64]) {
        match self.regularizer {
            Regularizer::Simplex => entropy_prox(z, anchor, out),
            Regularizer::Zero => {
                for i in 0..out.len() {
                    out[i] = anchor[i] - z[i] / self.weight(i);
                }
            }
            Regularizer::Quadratic(mu) => {
                let shrink = 1.0 + a_sum * mu;
                for i in 0..out.len() {
                    out[i] = (anchor[i] - z[i] / self.weight(i)) / shrink;
                }
            }
            Regularizer::Box { lo, hi } => {
                for i in 0..out.len() {
                    out[i] = (anchor[i] - z[i] / self.weight(i)).clamp(lo, hi);
                }
            }
        }
    }

    fn check_anchor(&self, anchor: &[f64]) -> Result<()> {
        match self.regularizer {
            Regularizer::Simplex => {
                if anchor.iter().any(|&a| a <= 0.0) {
                    return Err(Error::Domain("entropy anchor must be strictly positive".into()));
                }
                let s: f64 = anchor.iter().sum();
                if (s - 1.0).abs() > DOMAIN_TOL {
                    return Err(Error::Domain(format!("entropy anchor sums to {s}")));
                }
            }
            Regularizer::Box { lo, hi } => {
                if anchor.iter().any(|&a| a < lo - DOMAIN_TOL || a > hi + DOMAIN_TOL) {
                    return Err(Error::Domain("anchor outside the box".into()));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn in_domain(&self, u: &[f64], tol: f64) -> bool {
        match self.regularizer {
            Regularizer::Simplex => {
                u.iter().all(|&v| v >= -tol) && (u.iter().sum::<f64>() - 1.0).abs() <= tol
            }
            Regularizer::Box { lo, hi } => u.iter().all(|&v| v >= lo - tol && v <= hi + tol),
            _ => true,
        }
    }

    pub fn norm_sq(&self, v: &[f64]) -> f64 {
        match &self.norm {
            NormKind::Euclidean => v.iter().map(|x| x * x).sum(),
            NormKind::WeightedEuclidean(w) => v.iter().zip(w).map(|(x, w)| w * x * x).sum(),
            NormKind::L1Entropy => {
                let s: f64 = v.iter().map(|x| x.abs()).sum();
                s * s
            }
        }
    }

    pub fn dual_norm_sq(&self, v: &[f64]) -> f64 {
        match &self.norm {
            NormKind::Euclidean => v.iter().map(|x| x * x).sum(),
            NormKind::WeightedEuclidean(w) => v.iter().zip(w).map(|(x, w)| x * x / w).sum(),
            NormKind::L1Entropy => {
                let m = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                m * m
            }
        }
    }

    fn bregman_local(&self, x: &[f64], y: &[f64]) -> f64 {
        match &self.norm {
            NormKind::L1Entropy => x
                .iter()
                .zip(y)
                .map(|(&xi, &yi)| if xi > 0.0 { xi * (xi / yi).ln() - xi + yi } else { yi })
                .sum(),
            _ => {
                let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
                0.5 * self.norm_sq(&diff)
            }
        }
    }

    fn regularizer_local(&self, u: &[f64]) -> f64 {
        match self.regularizer {
            Regularizer::Zero => 0.0,
            Regularizer::Quadratic(mu) => 0.5 * mu * self.norm_sq(u),
            _ if self.in_domain(u, DOMAIN_TOL) => 0.0,
            _ => f64::INFINITY,
        }
    }

    /// `sup_{u ∈ dom g} D(u, anchor)`, or `None` on unbounded domains.
    pub fn sup_divergence(&self, anchor: &[f64]) -> Option<f64> {
        match self.regularizer {
            // Maximized at the vertex opposite the smallest anchor weight.
            Regularizer::Simplex => {
                let min = anchor.iter().fold(f64::INFINITY, |m, &a| m.min(a));
                Some(-min.ln())
            }
            Regularizer::Box { lo, hi } => Some(
                anchor
                    .iter()
                    .enumerate()
                    .map(|(i, &a)| 0.5 * self.weight(i) * (a - lo).abs().max((hi - a).abs()).powi(2))
                    .sum(),
            ),
            _ => None,
        }
    }

    fn random_local<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match self.regularizer {
            Regularizer::Simplex => {
                // Half of the draws land on a low-dimensional face so that
                // sup-type estimates see near-vertex pairs.
                let sparse = rng.gen_bool(0.5);
                for v in out.iter_mut() {
                    *v = if sparse && rng.gen_bool(0.7) { 0.0 } else { -rng.gen::<f64>().max(1e-300).ln() };
                }
                let s: f64 = out.iter().sum();
                if s <= 0.0 {
                    let k = rng.gen_range(0..out.len());
                    out.iter_mut().for_each(|v| *v = 0.0);
                    out[k] = 1.0;
                } else {
                    out.iter_mut().for_each(|v| *v /= s);
                }
            }
            Regularizer::Box { lo, hi } => {
                for v in out.iter_mut() {
                    *v = if rng.gen_bool(0.3) {
                        if rng.gen_bool(0.5) { lo } else { hi }
                    } else {
                        rng.gen_range(lo..=hi)
                    };
                }
            }
            _ => {
                for v in out.iter_mut() {
                    *v = rng.gen_range(-2.0..2.0);
                }
            }
        }
    }
}

/// `u_i ∝ x0_i exp(-z_i)` evaluated with max-subtraction in log space.
///
/// Outputs are floored at the smallest normal float so that the result can
/// serve as an interior anchor for a subsequent mirror step.
fn entropy_prox(z: &[f64], anchor: &[f64], out: &mut [f64]) {
    let mut max = f64::NEG_INFINITY;
    for i in 0..out.len() {
        let t = anchor[i].ln() - z[i];
        out[i] = t;
        max = max.max(t);
    }
    let mut sum = 0.0;
    for v in out.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in out.iter_mut() {
        *v = (*v / sum).max(f64::MIN_POSITIVE);
    }
}

/// Partition of the coordinates into [`BlockGeometry`] blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryBundle {
    dim: usize,
    blocks: Vec<BlockGeometry>,
    block_of: Vec<usize>,
    local_of: Vec<usize>,
}

impl GeometryBundle {
    pub fn new(dim: usize, blocks: Vec<BlockGeometry>) -> Result<Self> {
        let mut block_of = vec![usize::MAX; dim];
        let mut local_of = vec![0; dim];
        for (b, block) in blocks.iter().enumerate() {
            block.validate()?;
            for (local, &i) in block.indices.iter().enumerate() {
                if i >= dim {
                    return Err(Error::InvalidArgument(format!("block index {i} >= dimension {dim}")));
                }
                if block_of[i] != usize::MAX {
                    return Err(Error::InvalidArgument(format!("coordinate {i} in two blocks")));
                }
                block_of[i] = b;
                local_of[i] = local;
            }
        }
        if let Some(i) = block_of.iter().position(|&b| b == usize::MAX) {
            return Err(Error::InvalidArgument(format!("coordinate {i} not covered by any block")));
        }
        Ok(Self { dim, blocks, block_of, local_of })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[BlockGeometry] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, b: usize) -> &BlockGeometry {
        &self.blocks[b]
    }

    #[inline]
    pub fn block_of(&self, coordinate: usize) -> usize {
        self.block_of[coordinate]
    }

    /// Position of `coordinate` inside its block.
    #[inline]
    pub fn local_of(&self, coordinate: usize) -> usize {
        self.local_of[coordinate]
    }

    /// Strong convexity of the regularizer w.r.t. the composite norm.
    pub fn strong_convexity(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| match b.regularizer {
                Regularizer::Quadratic(mu) => mu,
                _ => 0.0,
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn default_anchor(&self) -> Vec<f64> {
        let mut x0 = vec![0.0; self.dim];
        for block in &self.blocks {
            for (&i, v) in block.indices.iter().zip(block.default_anchor()) {
                x0[i] = v;
            }
        }
        x0
    }

    /// Validates a full-length anchor for every block.
    pub fn check_anchor(&self, anchor: &[f64]) -> Result<()> {
        self.check_len(anchor)?;
        ensure_finite(anchor, "anchor")?;
        let mut buf = Vec::new();
        for block in &self.blocks {
            gather(&block.indices, anchor, &mut buf);
            block.check_anchor(&buf)?;
        }
        Ok(())
    }

    /// Checked single-block prox on block-local vectors.
    pub fn prox_step(&self, block: usize, z_block: &[f64], a_sum: f64, anchor_block: &[f64]) -> Result<Vec<f64>> {
        let geom = self
            .blocks
            .get(block)
            .ok_or_else(|| Error::InvalidArgument(format!("no block {block}")))?;
        if z_block.len() != geom.len() || anchor_block.len() != geom.len() {
            return Err(Error::InvalidArgument("block vector length mismatch".into()));
        }
        ensure_finite(z_block, "dual vector")?;
        ensure_finite(anchor_block, "anchor")?;
        if !(a_sum >= 0.0 && a_sum.is_finite()) {
            return Err(Error::InvalidArgument(format!("step-size sum {a_sum} must be >= 0")));
        }
        geom.check_anchor(anchor_block)?;
        let mut out = vec![0.0; geom.len()];
        geom.prox_local(z_block, a_sum, anchor_block, &mut out);
        Ok(out)
    }

    /// Prox of block `b` reading `z` and `anchor` at full length, writing into `x`.
    #[inline]
    pub(crate) fn prox_block_into(&self, b: usize, z: &[f64], a_sum: f64, anchor: &[f64], x: &mut [f64], scratch: &mut ProxScratch) {
        let block = &self.blocks[b];
        let idx = &block.indices;
        if idx.len() == 1 {
            let i = idx[0];
            let mut out = [0.0];
            block.prox_local(&[z[i]], a_sum, &[anchor[i]], &mut out);
            x[i] = out[0];
            return;
        }
        gather(idx, z, &mut scratch.z);
        gather(idx, anchor, &mut scratch.anchor);
        scratch.out.resize(idx.len(), 0.0);
        block.prox_local(&scratch.z, a_sum, &scratch.anchor, &mut scratch.out);
        for (&i, &v) in idx.iter().zip(&scratch.out) {
            x[i] = v;
        }
    }

    /// Full-vector prox: `x = argmin <z,u> + A g(u) + D(u, anchor)`.
    pub fn prox_full(&self, z: &[f64], a_sum: f64, anchor: &[f64], x: &mut [f64]) {
        let mut scratch = ProxScratch::default();
        for b in 0..self.blocks.len() {
            self.prox_block_into(b, z, a_sum, anchor, x, &mut scratch);
        }
    }

    pub fn bregman(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_len(x)?;
        self.check_len(y)?;
        ensure_finite(x, "x")?;
        ensure_finite(y, "y")?;
        let (mut bx, mut by) = (Vec::new(), Vec::new());
        let mut total = 0.0;
        for block in &self.blocks {
            gather(&block.indices, x, &mut bx);
            gather(&block.indices, y, &mut by);
            if block.norm == NormKind::L1Entropy {
                if by.iter().any(|&v| v <= 0.0) {
                    return Err(Error::Domain("entropy divergence needs an interior second argument".into()));
                }
                if bx.iter().any(|&v| v < -DOMAIN_TOL) {
                    return Err(Error::Domain("entropy divergence needs a nonnegative first argument".into()));
                }
            }
            total += block.bregman_local(&bx, &by);
        }
        Ok(total.max(0.0))
    }

    pub fn norm_sq(&self, v: &[f64]) -> f64 {
        self.fold_blocks(v, BlockGeometry::norm_sq)
    }

    pub fn dual_norm_sq(&self, v: &[f64]) -> f64 {
        self.fold_blocks(v, BlockGeometry::dual_norm_sq)
    }

    /// `g(u)`; `+∞` outside the domain (beyond [`DOMAIN_TOL`]).
    pub fn regularizer_value(&self, u: &[f64]) -> f64 {
        self.fold_blocks(u, BlockGeometry::regularizer_local)
    }

    pub fn is_feasible(&self, u: &[f64], tol: f64) -> bool {
        let mut buf = Vec::new();
        u.len() == self.dim
            && self.blocks.iter().all(|b| {
                gather(&b.indices, u, &mut buf);
                b.in_domain(&buf, tol)
            })
    }

    /// `sup_{u ∈ dom g} D(u, anchor)`; `None` if any block is unbounded.
    pub fn sup_divergence(&self, anchor: &[f64]) -> Option<f64> {
        let mut buf = Vec::new();
        self.blocks
            .iter()
            .map(|b| {
                gather(&b.indices, anchor, &mut buf);
                b.sup_divergence(&buf)
            })
            .sum()
    }

    /// A random feasible point (bounded boxes of half-width 2 on unbounded blocks).
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        let mut buf = Vec::new();
        for block in &self.blocks {
            buf.resize(block.len(), 0.0);
            block.random_local(rng, &mut buf);
            for (&i, &v) in block.indices.iter().zip(&buf) {
                x[i] = v;
            }
        }
        x
    }

    fn fold_blocks(&self, v: &[f64], f: impl Fn(&BlockGeometry, &[f64]) -> f64) -> f64 {
        let mut buf = Vec::new();
        self.blocks
            .iter()
            .map(|b| {
                gather(&b.indices, v, &mut buf);
                f(b, &buf)
            })
            .sum()
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() == self.dim {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("vector length {} != dimension {}", v.len(), self.dim)))
        }
    }
}

#[derive(Debug, Default)]
pub(crate) struct ProxScratch {
    z: Vec<f64>,
    anchor: Vec<f64>,
    out: Vec<f64>,
}

fn gather(indices: &[usize], src: &[f64], dst: &mut Vec<f64>) {
    dst.clear();
    dst.extend(indices.iter().map(|&i| src[i]));
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single(block: BlockGeometry) -> GeometryBundle {
        let d = block.len();
        GeometryBundle::new(d, vec![block]).unwrap()
    }

    #[test]
    fn quadratic_prox_closed_form() {
        let g = single(BlockGeometry::euclidean(vec![0, 1], Regularizer::Quadratic(1.0)));
        let u = g.prox_step(0, &[1.0, -1.0], 1.0, &[0.0, 0.0]).unwrap();
        assert_eq!(u, vec![-0.5, 0.5]);
    }

    #[test]
    fn entropy_prox_closed_form() {
        let g = single(BlockGeometry::simplex(vec![0, 1]));
        for a in [0.0, 1.0, 17.0] {
            let u = g.prox_step(0, &[2f64.ln(), 0.0], a, &[0.5, 0.5]).unwrap();
            assert_abs_diff_eq!(u[0], 1.0 / 3.0, epsilon = 1e-15);
            assert_abs_diff_eq!(u[1], 2.0 / 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn box_prox_clips() {
        let g = single(BlockGeometry::euclidean(vec![0, 1], Regularizer::Box { lo: -1.0, hi: 1.0 }));
        let u = g.prox_step(0, &[3.0, -0.5], 1.0, &[0.0, 0.0]).unwrap();
        assert_eq!(u, vec![-1.0, 0.5]);
    }

    #[test]
    fn weighted_prox_scales_by_inverse_weight() {
        let g = single(BlockGeometry::weighted(vec![0, 1], vec![4.0, 1.0], Regularizer::Zero));
        let u = g.prox_step(0, &[2.0, 2.0], 1.0, &[0.0, 0.0]).unwrap();
        assert_eq!(u, vec![-0.5, -2.0]);
    }

    #[test]
    fn entropy_prox_survives_huge_duals() {
        let g = single(BlockGeometry::simplex(vec![0, 1, 2]));
        let u = g.prox_step(0, &[1e6, 1e6 + 1.0, -1e6], 5.0, &[1.0 / 3.0; 3]).unwrap();
        assert!(u.iter().all(|v| v.is_finite() && *v > 0.0));
        assert_abs_diff_eq!(u.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn prox_rejects_bad_inputs() {
        let g = single(BlockGeometry::simplex(vec![0, 1]));
        assert!(matches!(g.prox_step(0, &[f64::NAN, 0.0], 1.0, &[0.5, 0.5]), Err(Error::NonFinite(_))));
        assert!(matches!(g.prox_step(0, &[0.0, 0.0], 1.0, &[1.0, 0.0]), Err(Error::Domain(_))));
        assert!(g.prox_step(0, &[0.0, 0.0], -1.0, &[0.5, 0.5]).is_err());
    }

    #[test]
    fn bregman_examples() {
        let e = single(BlockGeometry::euclidean(vec![0, 1], Regularizer::Zero));
        assert_eq!(e.bregman(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(e.bregman(&[1.0, 0.0], &[0.0, 0.0]).unwrap(), 0.5);
        let s = single(BlockGeometry::simplex(vec![0, 1]));
        assert_abs_diff_eq!(s.bregman(&[1.0, 0.0], &[0.5, 0.5]).unwrap(), 2f64.ln(), epsilon = 1e-15);
        assert!(s.bregman(&[0.5, 0.5], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn dual_norm_examples() {
        let e = single(BlockGeometry::euclidean(vec![0, 1], Regularizer::Zero));
        assert_eq!(e.dual_norm_sq(&[3.0, 4.0]), 25.0);
        let s = single(BlockGeometry::simplex(vec![0, 1]));
        assert_eq!(s.dual_norm_sq(&[3.0, -4.0]), 16.0);
        let w = single(BlockGeometry::weighted(vec![0, 1], vec![4.0, 1.0], Regularizer::Zero));
        assert_eq!(w.dual_norm_sq(&[2.0, 1.0]), 2.0);
    }

    #[test]
    fn bundle_validation() {
        let overlap = GeometryBundle::new(
            2,
            vec![
                BlockGeometry::euclidean(vec![0, 1], Regularizer::Zero),
                BlockGeometry::euclidean(vec![1], Regularizer::Zero),
            ],
        );
        assert!(overlap.is_err());
        let uncovered = GeometryBundle::new(3, vec![BlockGeometry::euclidean(vec![0, 1], Regularizer::Zero)]);
        assert!(uncovered.is_err());
        let bad_weight = GeometryBundle::new(1, vec![BlockGeometry::weighted(vec![0], vec![0.0], Regularizer::Zero)]);
        assert!(bad_weight.is_err());
        let mismatched = GeometryBundle::new(
            2,
            vec![BlockGeometry { indices: vec![0, 1], norm: NormKind::L1Entropy, regularizer: Regularizer::Zero }],
        );
        assert!(mismatched.is_err());
    }

    #[test]
    fn strong_convexity_is_min_over_blocks() {
        let g = GeometryBundle::new(
            3,
            vec![
                BlockGeometry::euclidean(vec![0], Regularizer::Quadratic(0.5)),
                BlockGeometry::euclidean(vec![1, 2], Regularizer::Quadratic(2.0)),
            ],
        )
        .unwrap();
        assert_eq!(g.strong_convexity(), 0.5);
        let h = GeometryBundle::new(
            2,
            vec![
                BlockGeometry::euclidean(vec![0], Regularizer::Quadratic(0.5)),
                BlockGeometry::euclidean(vec![1], Regularizer::Box { lo: -1.0, hi: 1.0 }),
            ],
        )
        .unwrap();
        assert_eq!(h.strong_convexity(), 0.0);
    }

    #[test]
    fn default_anchors() {
        let g = GeometryBundle::new(
            4,
            vec![
                BlockGeometry::simplex(vec![0, 1]),
                BlockGeometry::euclidean(vec![2], Regularizer::Box { lo: 1.0, hi: 2.0 }),
                BlockGeometry::euclidean(vec![3], Regularizer::Zero),
            ],
        )
        .unwrap();
        assert_eq!(g.default_anchor(), vec![0.5, 0.5, 1.0, 0.0]);
    }

    #[test]
    fn sup_divergence_of_product_of_simplices() {
        let g = GeometryBundle::new(5, vec![BlockGeometry::simplex(vec![0, 1]), BlockGeometry::simplex(vec![2, 3, 4])])
            .unwrap();
        let x0 = g.default_anchor();
        assert_abs_diff_eq!(g.sup_divergence(&x0).unwrap(), 2f64.ln() + 3f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn random_points_are_feasible() {
        let g = GeometryBundle::new(
            5,
            vec![
                BlockGeometry::simplex(vec![0, 1, 2]),
                BlockGeometry::euclidean(vec![3], Regularizer::Box { lo: -1.0, hi: 1.0 }),
                BlockGeometry::euclidean(vec![4], Regularizer::Zero),
            ],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let x = g.random_point(&mut rng);
            assert!(g.is_feasible(&x, 1e-12));
        }
    }
}
