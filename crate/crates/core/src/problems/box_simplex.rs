use std::sync::Arc;

use super::{row_counts, Family, ProblemInstance, SupGap};
use crate::error::{Error, Result};
use crate::geometry::{BlockGeometry, GeometryBundle, Regularizer};
use crate::matrix::SparseMatrix;
use crate::operator::{AffineOperator, LipschitzProfile, Term};
use crate::sampling::{normalize, power_weights, SamplingPlan};

/// `min_{z ∈ [-1,1]^d} max_i (A z − b)_i`, as the box-simplex game
/// `min_z max_{y ∈ Δ_n} ⟨y, A z − b⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSimplexSpec {
    pub a: SparseMatrix,
    pub b: Vec<f64>,
}

/// One component per column. Component `j` carries `(A_{:j}ᵀ y) e_j` on the
/// primal side and `−(A_{:j} z_j − b_share)` on the dual side, where each
/// `b_i` is split evenly over the nonzeros of row `i` (rows without nonzeros
/// hand their `b_i` to component 0).
///
/// The primal norm is `‖z‖² = Σ p_j z_j²` with `p ∝ σ^{2/5}`, which makes
/// `L_j = σ_j / √p_j` and `L_pq = (Σ σ^{2/5})^{5/2}` for `p = q`.
pub fn make_box_simplex(spec: &BoxSimplexSpec) -> Result<ProblemInstance> {
    let a = &spec.a;
    let (n, d) = (a.rows(), a.cols());
    if n == 0 || d == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    let counts = row_counts(a, &spec.b)?;
    let sigma: Vec<f64> = (0..d).map(|j| a.col_inf_norm(j)).collect();
    let w = power_weights(&sigma, 0.4)?;
    let p = normalize(&w)?;

    let empty_rows: Vec<usize> = (0..n).filter(|&i| counts[i] == 0).collect();
    let mut builder = AffineOperator::builder(d + n);
    for j in 0..d {
        let (rows, vals) = a.col(j);
        let mut dual: Vec<(usize, f64)> = rows.iter().map(|&i| (i, spec.b[i] / counts[i] as f64)).collect();
        if j == 0 {
            dual.extend(empty_rows.iter().map(|&i| (i, spec.b[i])));
            dual.sort_by_key(|e| e.0);
        }
        let mut outputs = vec![j];
        let mut constants = vec![0.0];
        outputs.extend(dual.iter().map(|e| d + e.0));
        constants.extend(dual.iter().map(|e| e.1));
        let mut terms = Vec::with_capacity(2 * rows.len());
        for (&i, &v) in rows.iter().zip(vals) {
            let slot = 1 + dual.binary_search_by_key(&i, |e| e.0).expect("row present") as u32;
            terms.push(Term { slot: 0, coord: (d + i) as u32, coef: v });
            terms.push(Term { slot, coord: j as u32, coef: -v });
        }
        builder.push(&outputs, &constants, &terms)?;
    }
    let operator = Arc::new(builder.build()?);

    let mut blocks: Vec<BlockGeometry> = (0..d)
        .map(|j| BlockGeometry::weighted(vec![j], vec![p[j]], Regularizer::Box { lo: -1.0, hi: 1.0 }))
        .collect();
    blocks.push(BlockGeometry::simplex((d..d + n).collect()));
    let geometry = GeometryBundle::new(d + n, blocks)?;
    let anchor = geometry.default_anchor();

    let lambda: Vec<f64> = sigma.iter().zip(&p).map(|(s, p)| s / p.sqrt()).collect();
    let profile = LipschitzProfile::new(lambda)?;
    let lpq = w.iter().sum::<f64>().powf(2.5);
    let plan = SamplingPlan::with_lpq(p.clone(), p, lpq)?;
    let full = profile.norm_l2();
    ProblemInstance::assemble(
        Family::BoxSimplex,
        operator,
        geometry,
        anchor,
        profile,
        plan,
        None,
        Some(full),
        SupGap::BoxSimplex { a: Arc::new(a.clone()), b: spec.b.clone() },
    )
}
