mod common;

use gmvi_core::metrics::gap_fixed;
use gmvi_core::operator::{evaluate_component, evaluate_full};
use gmvi_core::problems::{
    make_box_simplex, make_lad, make_matrix_game, make_policy_eval, solve_policy_eval_direct,
    stationary_distribution, BoxSimplexSpec, GameDecomposition, LadSpec, MatrixGameSpec, PolicyEvalSpec,
};
use gmvi_core::rem::{run_dense, SolverConfig};
use gmvi_core::{Error, SparseMatrix};
use nalgebra::DMatrix;

fn game(rows: &[Vec<f64>], decomposition: GameDecomposition) -> gmvi_core::ProblemInstance {
    make_matrix_game(&MatrixGameSpec { a: SparseMatrix::from_rows(rows).unwrap(), decomposition }).unwrap()
}

fn policy(p: &[f64], phi: &[f64], n: usize, dim: usize, r: &[f64], beta: f64, mu: f64) -> PolicyEvalSpec {
    PolicyEvalSpec {
        transition: DMatrix::from_row_slice(n, n, p),
        features: DMatrix::from_row_slice(n, dim, phi),
        rewards: r.to_vec(),
        beta,
        mu,
    }
}

fn sum_components(inst: &gmvi_core::ProblemInstance, x: &[f64]) -> Vec<f64> {
    let mut total = vec![0.0; inst.dim()];
    for j in 0..inst.num_components() {
        let v = evaluate_component(inst.operator.as_ref(), j, x).unwrap();
        for (i, val) in v.indices.iter().zip(&v.values) {
            total[*i] += val;
        }
    }
    total
}

#[test]
fn matrix_game_two_sided_sum() {
    let inst = game(&[vec![0.0, 1.0], vec![1.0, 0.0]], GameDecomposition::TwoSided);
    assert_eq!(inst.num_components(), 4);
    let x = [0.5, 0.5, 0.5, 0.5];
    // Oracle: (Aᵀy, −Az) by hand.
    assert_eq!(sum_components(&inst, &x), vec![0.5, 0.5, -0.5, -0.5]);
    assert_eq!(evaluate_full(inst.operator.as_ref(), &x).unwrap(), vec![0.5, 0.5, -0.5, -0.5]);
}

#[test]
fn matrix_game_row_component_with_zero_dual() {
    let inst = game(&[vec![2.0, -1.0], vec![1.0, 3.0]], GameDecomposition::TwoSided);
    let f = evaluate_component(inst.operator.as_ref(), 0, &[0.3, 0.7, 0.0, 1.0]).unwrap();
    assert!(f.values.iter().all(|&v| v == 0.0));
}

#[test]
fn matrix_game_identity_plan() {
    let inst = game(&[vec![1.0]], GameDecomposition::TwoSided);
    assert_eq!(inst.profile.lambda(), &[1.0, 1.0]);
    assert_eq!(inst.plan.p(), &[0.5, 0.5]);
    assert_eq!(inst.plan.q(), &[0.5, 0.5]);
}

#[test]
fn matrix_game_row_sided_concentrates() {
    let inst = game(&[vec![100.0, 1.0], vec![1.0, 1.0], vec![0.5, 1.0]], GameDecomposition::RowSided);
    assert_eq!(inst.num_components(), 3);
    let p = inst.plan.p();
    assert!((p[0] - 10.0 / 12.0).abs() < 1e-12);
    assert!(p[0] > p[1] && p[1] == p[2]);
    let x = [0.2, 0.8, 0.1, 0.6, 0.3];
    let full = evaluate_full(inst.operator.as_ref(), &x).unwrap();
    let sum = sum_components(&inst, &x);
    assert!(full.iter().zip(&sum).all(|(a, b)| (a - b).abs() < 1e-12));
}

#[test]
fn matrix_game_rejects_zero_lines() {
    let zero_row = MatrixGameSpec { a: SparseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap(), decomposition: GameDecomposition::TwoSided };
    assert!(matches!(make_matrix_game(&zero_row), Err(Error::ZeroWeight { index: 1 })));
    let zero_col = MatrixGameSpec { a: SparseMatrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap(), decomposition: GameDecomposition::TwoSided };
    assert!(matches!(make_matrix_game(&zero_col), Err(Error::ZeroWeight { index: 3 })));
    // An empty column is harmless when only rows are components.
    let row_sided = MatrixGameSpec { decomposition: GameDecomposition::RowSided, ..zero_col };
    assert!(make_matrix_game(&row_sided).is_ok());
}

/// Vertex-enumeration oracle for the matrix-game sup-gap.
fn game_gap_oracle(a: &[Vec<f64>], z: &[f64], y: &[f64]) -> f64 {
    let best_y = a.iter().map(|row| row.iter().zip(z).map(|(a, z)| a * z).sum::<f64>()).fold(f64::MIN, f64::max);
    let best_z = (0..z.len()).map(|c| a.iter().zip(y).map(|(row, y)| row[c] * y).sum::<f64>()).fold(f64::MAX, f64::min);
    best_y - best_z
}

#[test]
fn sup_gap_examples() {
    let swap = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
    let inst = game(&swap, GameDecomposition::TwoSided);
    assert!(inst.sup_gap(&[0.5, 0.5, 0.5, 0.5]).unwrap().abs() < 1e-15);

    let eye = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    let inst = game(&eye, GameDecomposition::TwoSided);
    let gap = inst.sup_gap(&[1.0, 0.0, 0.5, 0.5]).unwrap();
    assert!((gap - game_gap_oracle(&eye, &[1.0, 0.0], &[0.5, 0.5])).abs() < 1e-15);
    assert!((gap - 0.5).abs() < 1e-15);

    let lad = make_lad(&LadSpec { optimum: Some(0.0), ..LadSpec::new(SparseMatrix::from_rows(&eye).unwrap(), vec![0.0, 0.0]) }).unwrap();
    assert_eq!(lad.sup_gap(&[1.0, -1.0, 0.0, 0.0]).unwrap(), 2.0);
}

#[test]
fn equilibrium_gap_nonnegative() {
    let swap = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
    let inst = game(&swap, GameDecomposition::TwoSided);
    let eq = [0.5, 0.5, 0.5, 0.5];
    for x in [[1.0, 0.0, 0.0, 1.0], [0.3, 0.7, 0.9, 0.1], [0.5, 0.5, 0.5, 0.5]] {
        assert!(gap_fixed(inst.operator.as_ref(), &inst.geometry, &eq, &x).unwrap() >= -1e-12);
    }
    assert_eq!(gap_fixed(inst.operator.as_ref(), &inst.geometry, &eq, &eq).unwrap(), 0.0);
}

#[test]
fn box_simplex_examples() {
    let single = make_box_simplex(&BoxSimplexSpec { a: SparseMatrix::from_rows(&[vec![1.0]]).unwrap(), b: vec![0.0] }).unwrap();
    assert_eq!(single.num_components(), 1);
    assert_eq!(single.plan.p(), &[1.0]);
    let f = evaluate_full(single.operator.as_ref(), &[0.25, 1.0]).unwrap();
    assert_eq!(f, vec![1.0, -0.25]);

    let two = make_box_simplex(&BoxSimplexSpec { a: SparseMatrix::from_rows(&[vec![1.0, 32.0]]).unwrap(), b: vec![0.0] }).unwrap();
    assert!((two.plan.p()[0] - 0.2).abs() < 1e-15 && (two.plan.p()[1] - 0.8).abs() < 1e-15);

    let a = SparseMatrix::from_rows(&[vec![1.0, -2.0, 0.0], vec![0.5, 0.0, 3.0]]).unwrap();
    let z0 = [0.5, -0.25, 1.0];
    let b = a.mul_vec(&z0);
    let inst = make_box_simplex(&BoxSimplexSpec { a: a.clone(), b: b.clone() }).unwrap();
    let residual = a.mul_vec(&z0).iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert_eq!(residual, 0.0);
    for y in [[1.0, 0.0], [0.3, 0.7]] {
        let x: Vec<f64> = z0.iter().chain(&y).copied().collect();
        assert!(inst.sup_gap(&x).unwrap() >= 0.0);
    }
}

#[test]
fn box_simplex_rejects_zero_column() {
    let spec = BoxSimplexSpec { a: SparseMatrix::from_rows(&[vec![1.0, 0.0]]).unwrap(), b: vec![0.0] };
    assert!(make_box_simplex(&spec).is_err());
}

#[test]
fn box_simplex_empty_row_keeps_b() {
    let a = SparseMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 0.0], vec![0.0, 1.0]]).unwrap();
    let b = vec![0.5, -2.0, 1.5];
    let inst = make_box_simplex(&BoxSimplexSpec { a: a.clone(), b: b.clone() }).unwrap();
    let x = [0.3, -0.6, 0.2, 0.5, 0.3];
    let f = evaluate_full(inst.operator.as_ref(), &x).unwrap();
    let az = a.mul_vec(&x[..2]);
    let aty = a.tmul_vec(&x[2..]);
    for j in 0..2 {
        assert!((f[j] - aty[j]).abs() < 1e-15);
    }
    for i in 0..3 {
        assert!((f[2 + i] + az[i] - b[i]).abs() < 1e-15);
    }
}

#[test]
fn lad_examples() {
    let inst = make_lad(&LadSpec::new(SparseMatrix::from_rows(&[vec![2.0]]).unwrap(), vec![3.0])).unwrap();
    assert_eq!(inst.num_components(), 1);
    assert_eq!(evaluate_full(inst.operator.as_ref(), &[1.0, 0.5]).unwrap(), vec![1.0, 1.0]);

    let a = SparseMatrix::from_rows(&[vec![1.0, -4.0], vec![0.0, 9.0]]).unwrap();
    let inst = make_lad(&LadSpec::new(a, vec![1.0, 1.0])).unwrap();
    assert_eq!(inst.profile.lambda(), &[1.0, 4.0, 9.0]);
    assert_eq!(inst.profile.norm_half(), 36.0);

    let uniform = make_lad(&LadSpec::new(SparseMatrix::from_rows(&[vec![1.0, -1.0], vec![1.0, 1.0]]).unwrap(), vec![0.0; 2])).unwrap();
    assert!(uniform.plan.p().iter().all(|&p| (p - 0.25).abs() < 1e-15));
}

#[test]
fn lad_consistent_reduction() {
    let a = SparseMatrix::from_rows(&[vec![1.0, 2.0, 0.0], vec![0.0, -1.0, 3.0], vec![2.0, 0.0, 1.0]]).unwrap();
    let z_star = vec![0.5, -1.0, 0.25];
    let b = a.mul_vec(&z_star);
    let spec = LadSpec { optimum: Some(0.0), solution: Some(z_star.clone()), ..LadSpec::new(a.clone(), b.clone()) };
    let inst = make_lad(&spec).unwrap();
    let zbar = [0.1, 0.2, -0.3];
    let ybar = [0.5, -0.2, 0.9];
    let x: Vec<f64> = zbar.iter().chain(&ybar).copied().collect();
    let residual: Vec<f64> = a.mul_vec(&zbar).iter().zip(&b).map(|(u, v)| u - v).collect();
    let l1: f64 = residual.iter().map(|r| r.abs()).sum();
    assert!((inst.sup_gap(&x).unwrap() - l1).abs() < 1e-15);

    // Comparator (z*, sign(Az̄ − b)) gives ‖Az̄ − b‖₁ − ⟨Az* − b, ȳ⟩.
    let comparator: Vec<f64> = z_star.iter().copied().chain(residual.iter().map(|r| r.signum())).collect();
    let oracle = l1 - a.mul_vec(&z_star).iter().zip(&b).zip(&ybar).map(|((u, v), y)| (u - v) * y).sum::<f64>();
    let gap = inst.gap_fixed(&x, &comparator).unwrap();
    assert!((gap - oracle).abs() < 1e-12);
}

#[test]
fn lad_rejects_empty_row() {
    let a = SparseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
    assert!(make_lad(&LadSpec::new(a, vec![0.0, 1.0])).is_err());
}

#[test]
fn lad_strongly_monotone_reference() {
    let a = SparseMatrix::from_rows(&[vec![1.0, 2.0], vec![-1.0, 0.5], vec![0.0, 3.0]]).unwrap();
    let spec = LadSpec { gamma: 0.5, ..LadSpec::new(a, vec![1.0, -2.0, 0.5]) };
    let inst = make_lad(&spec).unwrap();
    let x = inst.reference.clone().unwrap();
    let f = evaluate_full(inst.operator.as_ref(), &x).unwrap();
    // Optimality: F(x*) + γ x* = 0.
    assert!(f.iter().zip(&x).all(|(f, x)| (f + 0.5 * x).abs() < 1e-12));
    assert!(!inst.has_sup_gap());
}

#[test]
fn policy_eval_symmetric_chain() {
    let spec = policy(&[0.5, 0.5, 0.5, 0.5], &[1.0, 0.0, 0.0, 1.0], 2, 2, &[1.0, 1.0], 0.5, 0.0);
    let x = solve_policy_eval_direct(&spec).unwrap();
    // Oracle: (I − βP) x = 1 with P1 = 1 gives x = 1/(1 − β).
    assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
    let inst = make_policy_eval(&spec).unwrap();
    assert_eq!(inst.num_components(), 4);
    assert!((inst.dist_sq(&[0.0, 0.0]).unwrap() - 8.0).abs() < 1e-12);
    let f = evaluate_full(inst.operator.as_ref(), &x).unwrap();
    assert!(f.iter().all(|v| v.abs() < 1e-12));
}

#[test]
fn policy_eval_zero_features() {
    let spec = policy(&[0.5, 0.5, 0.5, 0.5], &[0.0; 4], 2, 2, &[1.0, 2.0], 0.5, 0.3);
    let inst = make_policy_eval(&spec).unwrap();
    let x = [0.7, -1.1];
    let f = evaluate_full(inst.operator.as_ref(), &x).unwrap();
    assert!((f[0] + 0.3 * 0.7).abs() < 1e-15 && (f[1] - 0.3 * 1.1).abs() < 1e-15);
    // Every point solves the problem, so the direct system is singular and
    // REM started at x* = 0 never leaves it.
    assert!(matches!(solve_policy_eval_direct(&spec), Err(Error::Singular(_))));
    let trace = run_dense(&inst, &inst.plan, &SolverConfig::new(50, 1)).unwrap();
    assert!(trace.x_final.iter().all(|&v| v == 0.0));
}

#[test]
fn policy_eval_direct_special_cases() {
    let p = [0.9, 0.1, 0.5, 0.5];
    let zero_r = policy(&p, &[1.0, 0.0, 0.0, 1.0], 2, 2, &[0.0, 0.0], 0.7, 0.1);
    assert!(solve_policy_eval_direct(&zero_r).unwrap().iter().all(|v| v.abs() < 1e-15));
    let myopic = policy(&p, &[1.0, 0.0, 0.0, 1.0], 2, 2, &[3.0, -1.5], 0.0, 0.1);
    let x = solve_policy_eval_direct(&myopic).unwrap();
    assert!((x[0] - 3.0).abs() < 1e-12 && (x[1] + 1.5).abs() < 1e-12);
}

#[test]
fn policy_eval_rejects_non_stochastic() {
    let spec = policy(&[0.5, 0.6, 0.5, 0.5], &[1.0, 0.0, 0.0, 1.0], 2, 2, &[1.0, 1.0], 0.5, 0.1);
    assert!(make_policy_eval(&spec).is_err());
    let negative = policy(&[1.5, -0.5, 0.5, 0.5], &[1.0, 0.0, 0.0, 1.0], 2, 2, &[1.0, 1.0], 0.5, 0.1);
    assert!(make_policy_eval(&negative).is_err());
}

#[test]
fn stationary_examples() {
    let pi = stationary_distribution(&DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5])).unwrap();
    assert!((pi[0] - 0.5).abs() < 1e-12 && (pi[1] - 0.5).abs() < 1e-12);
    assert!(matches!(stationary_distribution(&DMatrix::identity(2, 2)), Err(Error::NoStationaryDistribution(_))));
    let pi = stationary_distribution(&DMatrix::from_row_slice(2, 2, &[0.9, 0.1, 0.5, 0.5])).unwrap();
    // Oracle: π₁ = p₂₁ / (p₁₂ + p₂₁).
    assert!((pi[0] - 5.0 / 6.0).abs() < 1e-12 && (pi[1] - 1.0 / 6.0).abs() < 1e-12);
    let cycle = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
    let pi = stationary_distribution(&cycle).unwrap();
    assert!(pi.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-12));
}
