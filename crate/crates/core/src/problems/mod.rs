//! Problem families: operator decomposition, geometry, Lipschitz profile,
//! default sampling plan and gap evaluators for each.

mod box_simplex;
pub mod generate;
mod lad;
mod matrix_game;
mod policy_eval;

use std::sync::Arc;

pub use box_simplex::{make_box_simplex, BoxSimplexSpec};
pub use lad::{make_lad, LadSpec};
pub use matrix_game::{make_matrix_game, GameDecomposition, MatrixGameSpec};
pub use policy_eval::{
    make_policy_eval, policy_eval_modulus, solve_policy_eval_direct, stationary_distribution, PolicyEvalSpec,
};

use crate::error::{Error, Result};
use crate::geometry::{GeometryBundle, DOMAIN_TOL};
use crate::matrix::SparseMatrix;
use crate::metrics::{dist_sq, gap_fixed, PointMetrics};
use crate::operator::{FiniteSumOperator, LipschitzProfile};
use crate::sampling::SamplingPlan;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    MatrixGame,
    BoxSimplex,
    Lad,
    PolicyEval,
    Custom,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::MatrixGame => "matrix-game",
            Family::BoxSimplex => "box-simplex",
            Family::Lad => "lad",
            Family::PolicyEval => "policy-eval",
            Family::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "matrix-game" => Some(Family::MatrixGame),
            "box-simplex" => Some(Family::BoxSimplex),
            "lad" => Some(Family::Lad),
            "policy-eval" => Some(Family::PolicyEval),
            _ => None,
        }
    }
}

/// Closed-form `sup_x Gap(x̄, x)` per family.
#[derive(Debug, Clone)]
pub(crate) enum SupGap {
    None,
    /// x = (z ∈ Δ_d, y ∈ Δ_n).
    MatrixGame { a: Arc<SparseMatrix> },
    /// x = (z ∈ [-1,1]^d, y ∈ Δ_n).
    BoxSimplex { a: Arc<SparseMatrix>, b: Vec<f64> },
    /// Primal reduction `‖A z̄ − b‖₁ − OPT`.
    Lad { a: Arc<SparseMatrix>, b: Vec<f64>, optimum: f64 },
}

/// A ready-to-solve instance. Immutable and shareable across runs.
#[derive(Clone)]
pub struct ProblemInstance {
    pub family: Family,
    pub operator: Arc<dyn FiniteSumOperator>,
    pub geometry: GeometryBundle,
    pub anchor: Vec<f64>,
    pub profile: LipschitzProfile,
    /// The family's default plan.
    pub plan: SamplingPlan,
    /// A solution, when one is known.
    pub reference: Option<Vec<f64>>,
    /// Lipschitz constant of the full operator, when known in closed form.
    pub full_lipschitz: Option<f64>,
    sup_gap: SupGap,
}

impl std::fmt::Debug for ProblemInstance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemInstance")
            .field("family", &self.family)
            .field("dim", &self.dim())
            .field("m", &self.num_components())
            .finish()
    }
}

impl ProblemInstance {
    /// A user-assembled instance with no closed-form gap.
    pub fn custom(
        operator: Arc<dyn FiniteSumOperator>,
        geometry: GeometryBundle,
        anchor: Vec<f64>,
        profile: LipschitzProfile,
        plan: SamplingPlan,
        reference: Option<Vec<f64>>,
    ) -> Result<Self> {
        Self::assemble(Family::Custom, operator, geometry, anchor, profile, plan, reference, None, SupGap::None)
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn assemble(
        family: Family,
        operator: Arc<dyn FiniteSumOperator>,
        geometry: GeometryBundle,
        anchor: Vec<f64>,
        profile: LipschitzProfile,
        plan: SamplingPlan,
        reference: Option<Vec<f64>>,
        full_lipschitz: Option<f64>,
        sup_gap: SupGap,
    ) -> Result<Self> {
        let (d, m) = (operator.dim(), operator.num_components());
        if geometry.dim() != d {
            return Err(Error::InvalidArgument("geometry and operator dimensions differ".into()));
        }
        if profile.len() != m || plan.m() != m {
            return Err(Error::InvalidArgument("profile or plan length differs from the component count".into()));
        }
        geometry.check_anchor(&anchor)?;
        if let Some(r) = &reference {
            if r.len() != d {
                return Err(Error::InvalidArgument("reference has the wrong length".into()));
            }
        }
        Ok(Self { family, operator, geometry, anchor, profile, plan, reference, full_lipschitz, sup_gap })
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    pub fn num_components(&self) -> usize {
        self.operator.num_components()
    }

    pub fn has_sup_gap(&self) -> bool {
        !matches!(self.sup_gap, SupGap::None)
    }

    /// `sup_x D(x, x0)`, or `None` on unbounded domains.
    pub fn sup_divergence(&self) -> Option<f64> {
        self.geometry.sup_divergence(&self.anchor)
    }

    /// Closed-form supremum of the gap at `candidate`.
    pub fn sup_gap(&self, candidate: &[f64]) -> Result<f64> {
        if candidate.len() != self.dim() {
            return Err(Error::InvalidArgument("candidate has the wrong length".into()));
        }
        match &self.sup_gap {
            SupGap::None => Err(Error::Unsupported(format!("no closed-form gap for {}", self.family.name()))),
            SupGap::MatrixGame { a } => {
                let d = a.cols();
                let (z, y) = candidate.split_at(d);
                let az = a.mul_vec(z);
                let aty = a.tmul_vec(y);
                let best_y = az.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
                let best_z = aty.iter().fold(f64::INFINITY, |m, &v| m.min(v));
                Ok(best_y - best_z)
            }
            SupGap::BoxSimplex { a, b } => {
                let d = a.cols();
                let (z, y) = candidate.split_at(d);
                let residual_max =
                    a.mul_vec(z).iter().zip(b).fold(f64::NEG_INFINITY, |m, (az, bi)| m.max(az - bi));
                let aty_l1: f64 = a.tmul_vec(y).iter().map(|v| v.abs()).sum();
                let by: f64 = b.iter().zip(y).map(|(b, y)| b * y).sum();
                Ok(residual_max + aty_l1 + by)
            }
            SupGap::Lad { a, b, optimum } => {
                let z = &candidate[..a.cols()];
                let l1: f64 = a.mul_vec(z).iter().zip(b).map(|(az, bi)| (az - bi).abs()).sum();
                Ok(l1 - optimum)
            }
        }
    }

    /// `Gap(candidate, comparator)`.
    pub fn gap_fixed(&self, candidate: &[f64], comparator: &[f64]) -> Result<f64> {
        gap_fixed(self.operator.as_ref(), &self.geometry, candidate, comparator)
    }

    pub fn dist_sq(&self, x: &[f64]) -> Result<f64> {
        dist_sq(&self.geometry, x, self.reference.as_deref())
    }

    /// Every metric defined for this instance at `x`.
    pub fn evaluate(&self, x: &[f64]) -> PointMetrics {
        let reference = self.reference.as_deref().filter(|r| self.geometry.is_feasible(r, DOMAIN_TOL));
        PointMetrics {
            gap: reference.and_then(|r| self.gap_fixed(x, r).ok()),
            sup_gap: self.sup_gap(x).ok(),
            dist_sq: self.dist_sq(x).ok(),
        }
    }
}

/// Validates `b` against `a` and returns per-row nonzero counts.
pub(crate) fn row_counts(a: &SparseMatrix, b: &[f64]) -> Result<Vec<usize>> {
    if b.len() != a.rows() {
        return Err(Error::InvalidArgument(format!("b has {} entries, A has {} rows", b.len(), a.rows())));
    }
    crate::error::ensure_finite(b, "b")?;
    Ok((0..a.rows()).map(|i| a.row_nnz(i)).collect())
}
