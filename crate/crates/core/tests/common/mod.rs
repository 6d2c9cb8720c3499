#![allow(dead_code)]

use gmvi_core::problems::generate::{generate_box_simplex, generate_lad, generate_matrix_game, generate_policy_eval, GenParams};
use gmvi_core::problems::{make_box_simplex, make_lad, make_matrix_game, make_policy_eval, GameDecomposition};
use gmvi_core::ProblemInstance;

/// The four criterion-1 instances.
pub fn matrix_game(seed: u64) -> ProblemInstance {
    let spec = generate_matrix_game(&GenParams::new(20, 20, 1.0, seed), GameDecomposition::TwoSided).unwrap();
    make_matrix_game(&spec).unwrap()
}

pub fn box_simplex(seed: u64) -> ProblemInstance {
    make_box_simplex(&generate_box_simplex(&GenParams::new(20, 30, 1.0, seed)).unwrap()).unwrap()
}

pub fn lad(seed: u64) -> ProblemInstance {
    make_lad(&generate_lad(&GenParams::new(30, 30, 1.0, seed).density(0.2)).unwrap()).unwrap()
}

pub fn policy_eval(seed: u64) -> ProblemInstance {
    make_policy_eval(&generate_policy_eval(10, 5, 0.9, 0.1, 0.0, seed).unwrap()).unwrap()
}

pub fn all_families(seed: u64) -> Vec<(&'static str, ProblemInstance)> {
    vec![
        ("matrix-game", matrix_game(seed)),
        ("box-simplex", box_simplex(seed)),
        ("lad", lad(seed)),
        ("policy-eval", policy_eval(seed)),
    ]
}

/// `|a − b| ≤ rtol · max(|a|, |b|, floor)`.
pub fn close(a: f64, b: f64, rtol: f64, floor: f64) -> bool {
    (a - b).abs() <= rtol * a.abs().max(b.abs()).max(floor)
}
