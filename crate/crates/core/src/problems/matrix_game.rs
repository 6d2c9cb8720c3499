use std::sync::Arc;

use super::{Family, ProblemInstance, SupGap};
use crate::error::{Error, Result};
use crate::geometry::{BlockGeometry, GeometryBundle};
use crate::matrix::SparseMatrix;
use crate::operator::{AffineOperator, LipschitzProfile, Term};
use crate::sampling::{normalize, power_weights, SamplingPlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GameDecomposition {
    /// One component per row and one per column (`m = n + d`).
    #[default]
    TwoSided,
    /// One component per row (`m = n`).
    RowSided,
}

/// `min_{z ∈ Δ_d} max_{y ∈ Δ_n} ⟨y, A z⟩` with `A` of shape `n × d`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixGameSpec {
    pub a: SparseMatrix,
    pub decomposition: GameDecomposition,
}

/// Builds the instance. Coordinates are `x = (z, y)` and
/// `F(x) = (Aᵀy, −Az)`, with entropy on both simplexes.
pub fn make_matrix_game(spec: &MatrixGameSpec) -> Result<ProblemInstance> {
    let a = &spec.a;
    let (n, d) = (a.rows(), a.cols());
    if n == 0 || d == 0 {
        return Err(Error::InvalidArgument("empty payoff matrix".into()));
    }
    let rho: Vec<f64> = (0..n).map(|i| a.row_inf_norm(i)).collect();
    let sigma: Vec<f64> = (0..d).map(|j| a.col_inf_norm(j)).collect();
    if let Some(i) = rho.iter().position(|&r| r == 0.0) {
        return Err(Error::ZeroWeight { index: i });
    }
    let mut builder = AffineOperator::builder(d + n);
    let (lambda, p, lpq) = match spec.decomposition {
        GameDecomposition::TwoSided => {
            if let Some(j) = sigma.iter().position(|&s| s == 0.0) {
                return Err(Error::ZeroWeight { index: n + j });
            }
            for i in 0..n {
                let (cols, vals) = a.row(i);
                let terms: Vec<Term> = vals
                    .iter()
                    .enumerate()
                    .map(|(t, &v)| Term { slot: t as u32, coord: (d + i) as u32, coef: v })
                    .collect();
                builder.push(cols, &vec![0.0; cols.len()], &terms)?;
            }
            for j in 0..d {
                let (rows, vals) = a.col(j);
                let outputs: Vec<usize> = rows.iter().map(|&i| d + i).collect();
                let terms: Vec<Term> = vals
                    .iter()
                    .enumerate()
                    .map(|(t, &v)| Term { slot: t as u32, coord: j as u32, coef: -v })
                    .collect();
                builder.push(&outputs, &vec![0.0; outputs.len()], &terms)?;
            }
            let lambda: Vec<f64> = rho.iter().chain(&sigma).copied().collect();
            let w = power_weights(&lambda, 2.0 / 3.0)?;
            // Row components move only z and column components only y, so
            // the sampled ratio collapses to (Σ w)^{3/2}.
            let total: f64 = w.iter().sum();
            (lambda, normalize(&w)?, total.powf(1.5))
        }
        GameDecomposition::RowSided => {
            for i in 0..n {
                let (cols, vals) = a.row(i);
                let mut outputs = cols.to_vec();
                outputs.push(d + i);
                let last = cols.len() as u32;
                let mut terms: Vec<Term> = Vec::with_capacity(2 * cols.len());
                for (t, (&c, &v)) in cols.iter().zip(vals).enumerate() {
                    terms.push(Term { slot: t as u32, coord: (d + i) as u32, coef: v });
                    terms.push(Term { slot: last, coord: c as u32, coef: -v });
                }
                builder.push(&outputs, &vec![0.0; outputs.len()], &terms)?;
            }
            let w = power_weights(&rho, 0.5)?;
            let total: f64 = w.iter().sum();
            (rho.clone(), normalize(&w)?, total * total)
        }
    };
    let operator = Arc::new(builder.build()?);
    let geometry = GeometryBundle::new(
        d + n,
        vec![BlockGeometry::simplex((0..d).collect()), BlockGeometry::simplex((d..d + n).collect())],
    )?;
    let anchor = geometry.default_anchor();
    let profile = LipschitzProfile::new(lambda)?;
    let plan = SamplingPlan::with_lpq(p.clone(), p, lpq)?;
    ProblemInstance::assemble(
        Family::MatrixGame,
        operator,
        geometry,
        anchor,
        profile,
        plan,
        None,
        Some(a.max_abs()),
        SupGap::MatrixGame { a: Arc::new(a.clone()) },
    )
}
