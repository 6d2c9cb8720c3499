use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{Family, ProblemInstance, SupGap};
use crate::error::{Error, Result};
use crate::geometry::{BlockGeometry, GeometryBundle, Regularizer};
use crate::operator::{AffineOperator, LipschitzProfile, Term};
use crate::sampling::{build_plan, SamplingMode};

const STOCHASTIC_TOL: f64 = 1e-12;
const STATIONARY_TOL: f64 = 1e-10;
/// Squarings of the lazy chain: 2^17 > 10^5 power steps.
const SQUARINGS: usize = 17;

/// Linear policy evaluation with `F(x) = Φᵀ M (Φx − R − βPΦx) − μx`,
/// `M = diag(π)`, and `g(x) = (μ/2)‖x‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyEvalSpec {
    /// Row-stochastic transition matrix of the policy, `n × n`.
    pub transition: DMatrix<f64>,
    /// Features, `n × dim`.
    pub features: DMatrix<f64>,
    pub rewards: Vec<f64>,
    pub beta: f64,
    pub mu: f64,
}

impl PolicyEvalSpec {
    fn validate(&self) -> Result<()> {
        let p = &self.transition;
        let n = p.nrows();
        if n == 0 || p.ncols() != n {
            return Err(Error::InvalidArgument("transition matrix must be square and nonempty".into()));
        }
        if self.features.nrows() != n || self.features.ncols() == 0 {
            return Err(Error::InvalidArgument("features must have one row per state".into()));
        }
        if self.rewards.len() != n {
            return Err(Error::InvalidArgument("rewards must have one entry per state".into()));
        }
        if !(0.0..1.0).contains(&self.beta) {
            return Err(Error::InvalidArgument(format!("discount {} outside [0, 1)", self.beta)));
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::InvalidArgument("mu must be finite and nonnegative".into()));
        }
        crate::error::ensure_finite(p.as_slice(), "transition")?;
        crate::error::ensure_finite(self.features.as_slice(), "features")?;
        crate::error::ensure_finite(&self.rewards, "rewards")?;
        for s in 0..n {
            let row = p.row(s);
            if row.iter().any(|&v| v < 0.0) || (row.sum() - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::InvalidArgument(format!("transition row {s} is not a probability vector")));
            }
        }
        Ok(())
    }

    fn occupancy(&self, pi: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(pi))
    }

    /// `Φᵀ M (Φ − βPΦ)`.
    fn system_matrix(&self, pi: &[f64]) -> DMatrix<f64> {
        let phi = &self.features;
        let m = self.occupancy(pi);
        phi.transpose() * m * (phi - &self.transition * phi * self.beta)
    }
}

/// Stationary distribution of a row-stochastic `P`. The lazy chain
/// `(I + P)/2` is squared repeatedly, so periodic chains are accepted;
/// chains whose limit rows disagree (several closed classes) are rejected.
pub fn stationary_distribution(p: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = p.nrows();
    if n == 0 || p.ncols() != n {
        return Err(Error::InvalidArgument("transition matrix must be square and nonempty".into()));
    }
    let mut power = (DMatrix::identity(n, n) + p) * 0.5;
    for _ in 0..SQUARINGS {
        power = &power * &power;
    }
    let first: Vec<f64> = power.row(0).iter().copied().collect();
    for s in 1..n {
        if power.row(s).iter().zip(&first).any(|(a, b)| (a - b).abs() > STOCHASTIC_TOL) {
            return Err(Error::NoStationaryDistribution("power iteration did not converge to a unique limit".into()));
        }
    }
    let total: f64 = first.iter().sum();
    let pi: Vec<f64> = first.iter().map(|v| v / total).collect();
    let pi_vec = DVector::from_column_slice(&pi);
    let residual = (p.transpose() * &pi_vec - &pi_vec).amax();
    if !(residual <= STATIONARY_TOL) {
        return Err(Error::NoStationaryDistribution(format!("stationarity residual {residual:e}")));
    }
    Ok(pi)
}

/// Solves `Φᵀ M (Φ − βPΦ) x = Φᵀ M R` by LU.
pub fn solve_policy_eval_direct(spec: &PolicyEvalSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let pi = stationary_distribution(&spec.transition)?;
    solve_with(spec, &pi)
}

fn solve_with(spec: &PolicyEvalSpec, pi: &[f64]) -> Result<Vec<f64>> {
    let system = spec.system_matrix(pi);
    let rhs = spec.features.transpose() * spec.occupancy(pi) * DVector::from_column_slice(&spec.rewards);
    let scale = system.amax();
    let lu = system.lu();
    let pivot = lu.u().diagonal().iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if !(pivot > 1e-13 * scale) {
        return Err(Error::Singular("policy evaluation system".into()));
    }
    let x = lu.solve(&rhs).ok_or_else(|| Error::Singular("policy evaluation system".into()))?;
    Ok(x.iter().copied().collect())
}

/// Strong monotonicity modulus of `x ↦ Φᵀ M (Φx − βPΦx)`: the smallest
/// eigenvalue of its symmetric part.
pub fn policy_eval_modulus(spec: &PolicyEvalSpec) -> Result<f64> {
    spec.validate()?;
    let pi = stationary_distribution(&spec.transition)?;
    let g = spec.system_matrix(&pi);
    let sym = (&g + g.transpose()) * 0.5;
    Ok(sym.symmetric_eigenvalues().min())
}

/// One component per transition `(s, s⁺)` with `Π = π_s P(s, s⁺) > 0`:
/// `Π (Φ(s) (⟨Φ(s) − βΦ(s⁺), x⟩ − R(s)) − μx)`. Components that vanish
/// identically are dropped.
pub fn make_policy_eval(spec: &PolicyEvalSpec) -> Result<ProblemInstance> {
    spec.validate()?;
    let pi = stationary_distribution(&spec.transition)?;
    let n = spec.transition.nrows();
    let dim = spec.features.ncols();
    let phi = &spec.features;
    let outputs: Vec<usize> = (0..dim).collect();
    let mut builder = AffineOperator::builder(dim);
    let mut lambda = Vec::new();
    for s in 0..n {
        for t in 0..n {
            let weight = pi[s] * spec.transition[(s, t)];
            if weight <= 0.0 {
                continue;
            }
            let mut block = DMatrix::<f64>::zeros(dim, dim);
            for r in 0..dim {
                for c in 0..dim {
                    block[(r, c)] = weight * phi[(s, r)] * (phi[(s, c)] - spec.beta * phi[(t, c)]);
                }
                block[(r, r)] -= weight * spec.mu;
            }
            let constants: Vec<f64> = (0..dim).map(|r| -weight * spec.rewards[s] * phi[(s, r)]).collect();
            let norm = block.singular_values().max();
            if norm == 0.0 && constants.iter().all(|&c| c == 0.0) {
                continue;
            }
            lambda.push(norm);
            let terms: Vec<Term> = (0..dim)
                .flat_map(|r| (0..dim).map(move |c| (r, c)))
                .filter(|&(r, c)| block[(r, c)] != 0.0)
                .map(|(r, c)| Term { slot: r as u32, coord: c as u32, coef: block[(r, c)] })
                .collect();
            builder.push(&outputs, &constants, &terms)?;
        }
    }
    let largest = lambda.iter().fold(0.0f64, |m, &v| m.max(v));
    if !(largest > 0.0) {
        return Err(Error::InvalidArgument("policy evaluation operator has no linear part".into()));
    }
    // Constant-only components are 0-Lipschitz; any positive entry is valid.
    for l in lambda.iter_mut().filter(|l| **l == 0.0) {
        *l = 1e-6 * largest;
    }
    let operator = Arc::new(builder.build()?);
    let reg = if spec.mu > 0.0 { Regularizer::Quadratic(spec.mu) } else { Regularizer::Zero };
    let geometry = GeometryBundle::new(dim, vec![BlockGeometry::euclidean(outputs, reg)])?;
    let anchor = geometry.default_anchor();
    let profile = LipschitzProfile::new(lambda)?;
    let plan = build_plan(&SamplingMode::Importance, &profile)?;
    let full = (spec.system_matrix(&pi) - DMatrix::identity(dim, dim) * spec.mu).singular_values().max();
    let reference = solve_with(spec, &pi).ok();
    ProblemInstance::assemble(
        Family::PolicyEval,
        operator,
        geometry,
        anchor,
        profile,
        plan,
        reference,
        Some(full),
        SupGap::None,
    )
}
