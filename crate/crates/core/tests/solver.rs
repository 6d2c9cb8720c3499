mod common;

use std::sync::Arc;

use gmvi_core::baselines::BaselineEngine;
use gmvi_core::operator::{evaluate_component, evaluate_full, AffineOperator, LipschitzProfile, Term};
use gmvi_core::problems::generate::{generate_lad, GenParams};
use gmvi_core::problems::make_lad;
use gmvi_core::rem::{extrapolate, initial_step, DenseRem, LazyRem};
use gmvi_core::{
    run_dense, run_lazy, Averaging, BlockGeometry, EvalPoint, GeometryBundle, Method, Mode, ProblemInstance, Regularizer,
    SamplingPlan, SolverConfig,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sampled(k: u64, seed: u64) -> SolverConfig {
    SolverConfig::new(k, seed).averaging(Averaging::SampledIndexSet)
}

fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(1e-300)).filter(|v| v.is_finite()).fold(0.0, f64::max)
}

/// A single-component affine operator `F(x) = M x + c` on `R^n`.
fn affine_single(m: &[Vec<f64>], c: &[f64], reg: Regularizer) -> ProblemInstance {
    let n = c.len();
    let mut terms = Vec::new();
    for (r, row) in m.iter().enumerate() {
        for (col, &v) in row.iter().enumerate() {
            if v != 0.0 {
                terms.push(Term { slot: r as u32, coord: col as u32, coef: v });
            }
        }
    }
    let outputs: Vec<usize> = (0..n).collect();
    let mut b = AffineOperator::builder(n);
    b.push(&outputs, c, &terms).unwrap();
    let op = b.build().unwrap();
    let l = nalgebra::DMatrix::from_fn(n, n, |r, col| m[r][col]).singular_values().max().max(1e-12);
    let profile = LipschitzProfile::new(vec![l]).unwrap();
    let plan = SamplingPlan::new(vec![1.0], vec![1.0], &profile).unwrap();
    let geom = GeometryBundle::new(n, vec![BlockGeometry::euclidean(outputs, reg)]).unwrap();
    ProblemInstance::custom(Arc::new(op), geom, vec![0.5; n], profile, plan, None).unwrap()
}

fn metric_values(trace: &gmvi_core::Trace) -> Vec<f64> {
    trace.records.iter().flat_map(|r| [r.gap, r.sup_gap, r.dist_sq]).flatten().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn dense_and_lazy_agree(gen_seed in 0u64..1000, seed in 0u64..1000, k in 1u64..=1000, n in 3usize..12, d in 3usize..12) {
        let inst = make_lad(&generate_lad(&GenParams::new(n, d, 1.5, gen_seed).density(0.5)).unwrap()).unwrap();
        prop_assume!(inst.num_components() <= 200);
        let cfg = sampled(k, seed).stride(7);
        let dense = run_dense(&inst, &inst.plan, &cfg).unwrap();
        let lazy = run_lazy(&inst, &inst.plan, &cfg).unwrap();
        prop_assert_eq!(dense.records.len(), lazy.records.len());
        prop_assert!(max_rel(&metric_values(&dense), &metric_values(&lazy)) <= 1e-9);
        prop_assert!(max_rel(&dense.x_final, &lazy.x_final) <= 1e-9);
    }
}

#[test]
fn flushed_lazy_iterate_matches_dense() {
    for (name, inst) in common::all_families(2) {
        let cfg = sampled(300, 9);
        let mut dense = DenseRem::new(&inst, &inst.plan, &cfg).unwrap();
        let mut lazy = LazyRem::new(&inst, &inst.plan, &cfg.clone().mode(Mode::Lazy)).unwrap();
        for k in 1..=300 {
            dense.advance();
            lazy.advance();
            if k % 37 == 0 || k == 300 {
                let err = max_rel(dense.x(), lazy.flushed());
                assert!(err <= 1e-9, "{name} at {k}: {err}");
            }
        }
    }
}

#[test]
fn lazy_touches_only_sampled_supports() {
    let spec = generate_lad(&GenParams::new(60, 50, 2.0, 4).density(0.05)).unwrap();
    let a = spec.a.clone();
    let inst = make_lad(&spec).unwrap();
    let max_row = (0..a.rows()).map(|i| a.row_nnz(i)).max().unwrap();
    let max_col = (0..a.cols()).map(|j| a.col_nnz(j)).max().unwrap();
    let trace = run_lazy(&inst, &inst.plan, &sampled(2000, 1)).unwrap();
    assert!(trace.max_touched > 0);
    assert!(trace.max_touched <= 2 * (max_row + max_col), "{} > {}", trace.max_touched, 2 * (max_row + max_col));
}

#[test]
fn zero_iterations() {
    let inst = common::lad(1);
    for trace in [run_dense(&inst, &inst.plan, &SolverConfig::new(0, 1)).unwrap(), run_lazy(&inst, &inst.plan, &sampled(0, 1)).unwrap()] {
        assert_eq!(trace.records.len(), 1);
        assert_eq!(trace.records[0].iteration, 0);
        assert_eq!(trace.oracle_calls, inst.num_components() as u64);
        assert!(trace.x_bar.is_none());
        assert_eq!(trace.x_final, inst.anchor);
    }
}

#[test]
fn single_iteration_average_is_first_iterate() {
    let inst = common::box_simplex(3);
    for cfg in [SolverConfig::new(1, 5), sampled(1, 5), sampled(1, 5).mode(Mode::Lazy)] {
        let trace = gmvi_core::run(&inst, &inst.plan, &cfg).unwrap();
        assert!(max_rel(trace.x_bar.as_ref().unwrap(), &trace.x_final) <= 1e-14);
    }
}

fn iterates(inst: &ProblemInstance, cfg: &SolverConfig) -> Vec<Vec<f64>> {
    let mut engine = DenseRem::new(inst, &inst.plan, cfg).unwrap();
    (0..cfg.iterations).map(|_| {
        engine.advance();
        engine.x().to_vec()
    }).collect()
}

fn plain_mean(xs: &[Vec<f64>]) -> Vec<f64> {
    let mut mean = vec![0.0; xs[0].len()];
    for x in xs {
        mean.iter_mut().zip(x).for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= xs.len() as f64);
    mean
}

#[test]
fn weighted_average_with_constant_steps_is_plain_mean() {
    let inst = common::matrix_game(4);
    let cfg = SolverConfig::new(200, 3);
    let trace = run_dense(&inst, &inst.plan, &cfg).unwrap();
    let mean = plain_mean(&iterates(&inst, &cfg));
    assert!(max_rel(trace.x_bar.as_ref().unwrap(), &mean) <= 1e-12);
}

#[test]
fn full_index_set_is_plain_mean() {
    // With m = 1 the set has ⌈K/1⌉ = K elements.
    let inst = affine_single(&[vec![0.0, 1.0], vec![-1.0, 0.0]], &[0.2, -0.1], Regularizer::Zero);
    let cfg = sampled(150, 8);
    assert_eq!(gmvi_core::rem::draw_index_set(8, 150, 1), (1..=150).collect::<Vec<_>>());
    let trace = run_dense(&inst, &inst.plan, &cfg).unwrap();
    let mean = plain_mean(&iterates(&inst, &cfg));
    assert!(max_rel(trace.x_bar.as_ref().unwrap(), &mean) <= 1e-12);
}

#[test]
fn estimator_is_unbiased_by_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (name, inst) in common::all_families(5) {
        let m = inst.num_components();
        assert!(m <= 1000);
        let steps = rng.gen_range(1..40);
        let cfg = SolverConfig::new(steps, rng.gen());
        let mut engine = DenseRem::new(&inst, &inst.plan, &cfg).unwrap();
        for _ in 0..steps {
            engine.advance();
        }
        let x_prev = engine.x().to_vec();
        let table = engine.table();
        let (a_prev, a) = (0.3, 0.45);
        let p = inst.plan.p();
        let mut expectation = vec![0.0; inst.dim()];
        for j in 0..m {
            let fj = evaluate_component(inst.operator.as_ref(), j, &x_prev).unwrap();
            let hat = extrapolate(table, j, &fj.values, a_prev, a, p[j]);
            expectation.iter_mut().zip(&hat).for_each(|(e, h)| *e += p[j] * h);
        }
        // Oracle: S + (a_prev / a)(F(x_prev) − Σ_j F̃_{-,j}).
        let full = evaluate_full(inst.operator.as_ref(), &x_prev).unwrap();
        let mut shadow_sum = vec![0.0; inst.dim()];
        for j in 0..m {
            for (&i, &v) in table.support(j).iter().zip(table.previous_value(j)) {
                shadow_sum[i] += v;
            }
        }
        let scale = full.iter().chain(table.aggregate()).fold(1.0f64, |s, v| s.max(v.abs()));
        for i in 0..inst.dim() {
            let oracle = table.aggregate()[i] + a_prev / a * (full[i] - shadow_sum[i]);
            assert!((expectation[i] - oracle).abs() <= 1e-10 * scale, "{name}: coordinate {i}");
        }
    }
}

#[test]
fn first_extrapolation_is_the_initial_operator() {
    let inst = common::lad(2);
    let engine = DenseRem::new(&inst, &inst.plan, &SolverConfig::new(1, 1)).unwrap();
    let f0 = evaluate_full(inst.operator.as_ref(), &inst.anchor).unwrap();
    let fj = evaluate_component(inst.operator.as_ref(), 3, &inst.anchor).unwrap();
    let hat = extrapolate(engine.table(), 3, &fj.values, 0.0, initial_step(inst.plan.lpq()), inst.plan.p()[3]);
    assert!(max_rel(&hat, &f0) <= 1e-12);
}

#[test]
fn table_entries_are_fresh() {
    for (name, inst) in common::all_families(6) {
        let cfg = SolverConfig::new(400, 2);
        let mut engine = DenseRem::new(&inst, &inst.plan, &cfg).unwrap();
        let mut history = vec![inst.anchor.clone()];
        for _ in 0..400 {
            engine.advance();
            history.push(engine.x().to_vec());
        }
        let table = engine.table();
        for j in 0..inst.num_components() {
            let at = &history[table.stamp(j) as usize];
            let expect = evaluate_component(inst.operator.as_ref(), j, at).unwrap();
            assert_eq!(table.value(j), expect.values.as_slice(), "{name}: component {j}");
        }
    }
}

#[test]
fn oracle_accounting() {
    for (name, inst) in common::all_families(7) {
        let m = inst.num_components() as u64;
        for k in [0u64, 1, 17, 250] {
            let dense = run_dense(&inst, &inst.plan, &SolverConfig::new(k, 1)).unwrap();
            let lazy = run_lazy(&inst, &inst.plan, &sampled(k, 1)).unwrap();
            assert_eq!(dense.oracle_calls, m + 2 * k, "{name}");
            assert_eq!(lazy.oracle_calls, m + 2 * k, "{name}");
            assert!(dense.records.iter().all(|r| r.oracle_calls == m + 2 * r.iteration));
        }
    }
}

#[test]
fn strongly_convex_runs_report_the_iterate() {
    let inst = common::policy_eval(1);
    let cfg = SolverConfig::new(50, 1).stride(50);
    let trace = run_dense(&inst, &inst.plan, &cfg).unwrap();
    let last = trace.records.last().unwrap();
    assert_eq!(last.dist_sq.unwrap(), inst.dist_sq(&trace.x_final).unwrap());
    let avg = run_dense(&inst, &inst.plan, &cfg.clone().eval_point(EvalPoint::Average)).unwrap();
    assert_eq!(avg.records.last().unwrap().dist_sq.unwrap(), inst.dist_sq(avg.x_bar.as_ref().unwrap()).unwrap());
}

#[test]
fn weighted_full_is_rejected_in_lazy_mode() {
    let inst = common::lad(1);
    let cfg = SolverConfig::new(10, 1).averaging(Averaging::WeightedFull);
    assert!(run_lazy(&inst, &inst.plan, &cfg).is_err());
}

#[test]
fn divergence_guard_trips() {
    let inst = affine_single(&[vec![0.0, 1.0], vec![-1.0, 0.0]], &[0.0, 0.0], Regularizer::Zero);
    let mut cfg = SolverConfig::new(5000, 1);
    cfg.lpq = Some(inst.plan.lpq() * 1e-2);
    cfg.certify_steps = false;
    assert!(matches!(run_dense(&inst, &inst.plan, &cfg), Err(gmvi_core::Error::Diverged { .. })));
}

/// `u_{k+1} = u_k − a (2 F(u_k) − F(u_{k−1}))` on an unconstrained affine map.
fn optimistic_oracle(m: &[Vec<f64>], c: &[f64], a: f64, u0: &[f64], u1: &[f64], steps: usize) -> Vec<Vec<f64>> {
    let f = |u: &[f64]| -> Vec<f64> { m.iter().zip(c).map(|(row, c)| row.iter().zip(u).map(|(a, b)| a * b).sum::<f64>() + c).collect() };
    let mut out = vec![u0.to_vec(), u1.to_vec()];
    for k in 1..steps {
        let (prev, cur) = (&out[k - 1], &out[k]);
        let (fp, fc) = (f(prev), f(cur));
        let next: Vec<f64> = (0..c.len()).map(|i| cur[i] - a * (2.0 * fc[i] - fp[i])).collect();
        out.push(next);
    }
    out
}

#[test]
fn single_component_rem_follows_popov_recurrence() {
    let m = vec![vec![0.3, 1.0], vec![-1.0, 0.2]];
    let c = vec![0.4, -0.7];
    let inst = affine_single(&m, &c, Regularizer::Zero);
    let a = initial_step(inst.plan.lpq());
    let steps = 200;

    let mut rem = DenseRem::new(&inst, &inst.plan, &SolverConfig::new(steps as u64, 3)).unwrap();
    let mut rem_path = vec![inst.anchor.clone()];
    let mut popov = BaselineEngine::new(&inst, Method::Popov, a).unwrap();
    let mut popov_path = vec![];
    for _ in 0..steps {
        rem.advance();
        rem_path.push(rem.x().to_vec());
        popov.step();
        popov_path.push(popov.w().to_vec());
    }
    // Popov's w after step k is w_{k-1}; one more step exposes w_{steps}.
    popov.step();
    popov_path.push(popov.w().to_vec());

    let rem_oracle = optimistic_oracle(&m, &c, a, &rem_path[0], &rem_path[1], steps);
    let popov_oracle = optimistic_oracle(&m, &c, a, &popov_path[0], &popov_path[1], steps);
    for k in 0..=steps {
        assert!(max_rel(&rem_path[k], &rem_oracle[k]) <= 1e-10, "rem at {k}");
        assert!(max_rel(&popov_path[k], &popov_oracle[k]) <= 1e-10, "popov at {k}");
    }
    // The two only differ in the first step: x_1 = x_0 − aF(x_0), w_1 = x_0 − 2aF(x_0).
    let f0 = evaluate_full(inst.operator.as_ref(), &inst.anchor).unwrap();
    for i in 0..2 {
        assert!((rem_path[1][i] - (inst.anchor[i] - a * f0[i])).abs() < 1e-15);
        assert!((popov_path[1][i] - (inst.anchor[i] - 2.0 * a * f0[i])).abs() < 1e-15);
    }
}
