//! Randomized extrapolated method (REM) for finite-sum monotone variational
//! inequalities `⟨F(x), x − x*⟩ + g(x) − g(x*) ≥ 0` with `F = Σ_j F_j`.
//!
//! The crate provides block geometries with closed-form prox steps, sparse
//! finite-sum operators with a SAGA-style component table, importance
//! sampling plans, dense and lazy REM engines, mirror-prox and Popov
//! baselines, and four problem families with gap evaluators.

pub mod baselines;
pub mod error;
pub mod geometry;
pub mod io;
pub mod matrix;
pub mod metrics;
pub mod operator;
pub mod problems;
pub mod rem;
pub mod sampling;

pub use baselines::{run_baseline, BaselineConfig, Method};
pub use error::{Error, Result};
pub use geometry::{BlockGeometry, GeometryBundle, NormKind, Regularizer};
pub use matrix::SparseMatrix;
pub use metrics::{EvalRecord, PointMetrics};
pub use operator::{AffineOperator, ComponentTable, FiniteSumOperator, LipschitzProfile, SparseVec, Term};
pub use problems::{Family, ProblemInstance};
pub use rem::{run, run_dense, run_lazy, Averaging, EvalPoint, Mode, SolverConfig, Trace};
pub use sampling::{build_plan, RngStream, SamplingMode, SamplingPlan};
