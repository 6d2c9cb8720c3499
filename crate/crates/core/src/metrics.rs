//! Gap and distance metrics.

use crate::error::{Error, Result};
use crate::geometry::{GeometryBundle, DOMAIN_TOL};
use crate::operator::FiniteSumOperator;

/// Metric values at one point; absent entries are not defined for the instance.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PointMetrics {
    pub gap: Option<f64>,
    pub sup_gap: Option<f64>,
    pub dist_sq: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalRecord {
    pub iteration: u64,
    pub oracle_calls: u64,
    pub elapsed_ns: u64,
    pub gap: Option<f64>,
    pub sup_gap: Option<f64>,
    pub dist_sq: Option<f64>,
}

impl EvalRecord {
    pub fn new(iteration: u64, oracle_calls: u64, elapsed_ns: u64, m: PointMetrics) -> Self {
        Self { iteration, oracle_calls, elapsed_ns, gap: m.gap, sup_gap: m.sup_gap, dist_sq: m.dist_sq }
    }

    pub fn metrics(&self) -> PointMetrics {
        PointMetrics { gap: self.gap, sup_gap: self.sup_gap, dist_sq: self.dist_sq }
    }
}

/// `⟨F(x), candidate − x⟩ − g(x) + g(candidate)` for a fixed comparator `x`.
pub fn gap_fixed(op: &dyn FiniteSumOperator, geom: &GeometryBundle, candidate: &[f64], comparator: &[f64]) -> Result<f64> {
    let d = geom.dim();
    if candidate.len() != d || comparator.len() != d {
        return Err(Error::InvalidArgument("point length differs from the geometry dimension".into()));
    }
    if !geom.is_feasible(comparator, DOMAIN_TOL) {
        return Err(Error::Domain("comparator outside dom(g)".into()));
    }
    if !geom.is_feasible(candidate, DOMAIN_TOL) {
        return Err(Error::Domain("candidate outside dom(g)".into()));
    }
    let f = crate::operator::evaluate_full(op, comparator)?;
    let inner: f64 = f.iter().zip(candidate.iter().zip(comparator)).map(|(f, (c, x))| f * (c - x)).sum();
    Ok(inner - geom.regularizer_value(comparator) + geom.regularizer_value(candidate))
}

/// Squared composite-norm distance to a reference point.
pub fn dist_sq(geom: &GeometryBundle, x: &[f64], reference: Option<&[f64]>) -> Result<f64> {
    let reference = reference.ok_or_else(|| Error::Unsupported("instance has no reference solution".into()))?;
    if x.len() != geom.dim() || reference.len() != geom.dim() {
        return Err(Error::InvalidArgument("point length differs from the geometry dimension".into()));
    }
    let diff: Vec<f64> = x.iter().zip(reference).map(|(a, b)| a - b).collect();
    Ok(geom.norm_sq(&diff))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BlockGeometry, Regularizer};

    #[test]
    fn euclidean_distance() {
        let g = GeometryBundle::new(2, vec![BlockGeometry::euclidean(vec![0, 1], Regularizer::Zero)]).unwrap();
        assert_eq!(dist_sq(&g, &[1.0, 0.0], Some(&[0.0, 0.0])).unwrap(), 1.0);
        assert_eq!(dist_sq(&g, &[1.0, 0.0], Some(&[1.0, 0.0])).unwrap(), 0.0);
        assert!(dist_sq(&g, &[1.0, 0.0], None).is_err());
    }
}
