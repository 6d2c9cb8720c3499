use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{row_counts, Family, ProblemInstance, SupGap};
use crate::error::{Error, Result};
use crate::geometry::{BlockGeometry, GeometryBundle, Regularizer};
use crate::matrix::SparseMatrix;
use crate::operator::{AffineOperator, LipschitzProfile, Term};
use crate::sampling::{normalize, power_weights, SamplingPlan};

/// `min_z ‖A z − b‖₁` as `min_z max_{y ∈ [-1,1]^n} ⟨y, A z − b⟩`.
///
/// With `gamma > 0` the box is dropped and `(γ/2)‖x‖²` is added on both
/// sides, giving a strongly monotone problem with a closed-form solution.
#[derive(Debug, Clone, PartialEq)]
pub struct LadSpec {
    pub a: SparseMatrix,
    pub b: Vec<f64>,
    /// Known optimal value of `‖A z − b‖₁`.
    pub optimum: Option<f64>,
    /// A known minimizer `z*`.
    pub solution: Option<Vec<f64>>,
    pub gamma: f64,
}

impl LadSpec {
    pub fn new(a: SparseMatrix, b: Vec<f64>) -> Self {
        Self { a, b, optimum: None, solution: None, gamma: 0.0 }
    }
}

/// One component per nonzero `A_ij` in row-major order, carrying
/// `(A_ij y_i e_j, −(A_ij z_j − b_i / nnz_i) e_i)`.
pub fn make_lad(spec: &LadSpec) -> Result<ProblemInstance> {
    let a = &spec.a;
    let (n, d) = (a.rows(), a.cols());
    let counts = row_counts(a, &spec.b)?;
    if let Some(i) = counts.iter().position(|&c| c == 0) {
        return Err(Error::InvalidArgument(format!("row {i} of A has no nonzeros")));
    }
    if !(spec.gamma >= 0.0 && spec.gamma.is_finite()) {
        return Err(Error::InvalidArgument("gamma must be finite and nonnegative".into()));
    }
    let mut builder = AffineOperator::builder(d + n);
    let mut lambda = Vec::with_capacity(a.nnz());
    for (i, j, v) in a.iter() {
        let terms = [
            Term { slot: 0, coord: (d + i) as u32, coef: v },
            Term { slot: 1, coord: j as u32, coef: -v },
        ];
        builder.push(&[j, d + i], &[0.0, spec.b[i] / counts[i] as f64], &terms)?;
        lambda.push(v.abs());
    }
    let operator = Arc::new(builder.build()?);

    let strongly_monotone = spec.gamma > 0.0;
    let blocks = (0..d + n)
        .map(|i| {
            let reg = if strongly_monotone {
                Regularizer::Quadratic(spec.gamma)
            } else if i < d {
                Regularizer::Zero
            } else {
                Regularizer::Box { lo: -1.0, hi: 1.0 }
            };
            BlockGeometry::euclidean(vec![i], reg)
        })
        .collect();
    let geometry = GeometryBundle::new(d + n, blocks)?;
    let anchor = geometry.default_anchor();

    let profile = LipschitzProfile::new(lambda)?;
    let p = normalize(&power_weights(profile.lambda(), 0.5)?)?;
    let plan = SamplingPlan::new(p.clone(), p, &profile)?;

    let (reference, sup_gap) = if strongly_monotone {
        (Some(strongly_monotone_solution(a, &spec.b, spec.gamma)?), SupGap::None)
    } else {
        let reference = match &spec.solution {
            Some(z) if z.len() != d => return Err(Error::InvalidArgument("solution has the wrong length".into())),
            Some(z) => {
                let mut x = z.clone();
                x.resize(d + n, 0.0);
                Some(x)
            }
            None => None,
        };
        let sup = match spec.optimum {
            Some(optimum) => SupGap::Lad { a: Arc::new(a.clone()), b: spec.b.clone(), optimum },
            None => SupGap::None,
        };
        (reference, sup)
    };
    ProblemInstance::assemble(
        Family::Lad,
        operator,
        geometry,
        anchor,
        profile,
        plan,
        reference,
        Some(a.spectral_norm()),
        sup_gap,
    )
}

/// Solves `Aᵀy + γz = 0`, `b − Az + γy = 0`.
fn strongly_monotone_solution(a: &SparseMatrix, b: &[f64], gamma: f64) -> Result<Vec<f64>> {
    let dense = a.to_dense();
    let n = a.rows();
    let system = &dense * dense.transpose() / gamma + DMatrix::identity(n, n) * gamma;
    let rhs = -DVector::from_column_slice(b);
    let chol = system.cholesky().ok_or_else(|| Error::Singular("LAD normal system".into()))?;
    let y = chol.solve(&rhs);
    let z = -(dense.transpose() * &y) / gamma;
    Ok(z.iter().chain(y.iter()).copied().collect())
}
