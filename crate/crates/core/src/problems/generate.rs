//! Seeded random instances with a power-law component Lipschitz profile.
//!
//! Component magnitudes are `r^{−exponent}` for a random rank permutation
//! `r = 1..m`, so exponent 0 gives a uniform profile.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{BoxSimplexSpec, GameDecomposition, LadSpec, MatrixGameSpec, PolicyEvalSpec};
use crate::error::{Error, Result};
use crate::matrix::SparseMatrix;

/// Size and shape parameters shared by the generators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenParams {
    pub n: usize,
    pub d: usize,
    /// Fraction of entries that are nonzero, in `(0, 1]`.
    pub density: f64,
    pub exponent: f64,
    pub seed: u64,
}

impl GenParams {
    pub fn new(n: usize, d: usize, exponent: f64, seed: u64) -> Self {
        Self { n, d, density: 1.0, exponent, seed }
    }

    pub fn density(mut self, density: f64) -> Self {
        self.density = density;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return Err(Error::InvalidArgument("sizes must be at least 1".into()));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(Error::InvalidArgument(format!("density {} outside (0, 1]", self.density)));
        }
        if !(self.exponent >= 0.0 && self.exponent.is_finite()) {
            return Err(Error::InvalidArgument("exponent must be finite and nonnegative".into()));
        }
        Ok(())
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// `r^{−exponent}` over a random permutation of ranks `1..=m`.
fn power_law<R: Rng>(m: usize, exponent: f64, rng: &mut R) -> Vec<f64> {
    let mut ranks: Vec<usize> = (1..=m).collect();
    ranks.shuffle(rng);
    ranks.into_iter().map(|r| (r as f64).powf(-exponent)).collect()
}

fn sign<R: Rng>(rng: &mut R) -> f64 {
    if rng.gen::<bool>() {
        1.0
    } else {
        -1.0
    }
}

/// A random sparsity pattern in which every row has an entry, and every
/// column too when `cover_columns` is set. Coverage is forced by adding
/// entries, so no retry loop is needed.
fn pattern<R: Rng>(n: usize, d: usize, density: f64, cover_columns: bool, rng: &mut R) -> Vec<(usize, usize)> {
    let mut set = BTreeSet::new();
    for i in 0..n {
        for j in 0..d {
            if rng.gen::<f64>() < density {
                set.insert((i, j));
            }
        }
    }
    for i in 0..n {
        if !set.range((i, 0)..(i + 1, 0)).any(|_| true) {
            set.insert((i, rng.gen_range(0..d)));
        }
    }
    if cover_columns {
        for j in 0..d {
            if !set.iter().any(|&(_, c)| c == j) {
                set.insert((rng.gen_range(0..n), j));
            }
        }
    }
    set.into_iter().collect()
}

/// `n × d` LAD instance with `b = A z*` for `z*` uniform in `[−1, 1]^d`.
/// Every nonzero is a component and carries magnitude `r^{−exponent}`.
pub fn generate_lad(params: &GenParams) -> Result<LadSpec> {
    params.validate()?;
    let mut rng = params.rng();
    let entries = pattern(params.n, params.d, params.density, false, &mut rng);
    let magnitudes = power_law(entries.len(), params.exponent, &mut rng);
    let triplets: Vec<(usize, usize, f64)> =
        entries.iter().zip(&magnitudes).map(|(&(i, j), &v)| (i, j, sign(&mut rng) * v)).collect();
    let a = SparseMatrix::from_triplets(params.n, params.d, &triplets)?;
    let z: Vec<f64> = (0..params.d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let b = a.mul_vec(&z);
    Ok(LadSpec { a, b, optimum: Some(0.0), solution: Some(z), gamma: 0.0 })
}

/// `n × d` payoff matrix. Rows and columns draw power-law scales from one
/// shared rank permutation of `n + d` and each entry is the product of its
/// row and column scales with a uniform factor in `[1/2, 1]`. On dense
/// patterns `ρ` and `σ` then track the row and column scales.
pub fn generate_matrix_game(params: &GenParams, decomposition: GameDecomposition) -> Result<MatrixGameSpec> {
    params.validate()?;
    let (n, d) = (params.n, params.d);
    let mut rng = params.rng();
    let entries = pattern(n, d, params.density, decomposition == GameDecomposition::TwoSided, &mut rng);
    let scales = power_law(n + d, params.exponent / 2.0, &mut rng);
    let triplets: Vec<(usize, usize, f64)> = entries
        .iter()
        .map(|&(i, j)| (i, j, sign(&mut rng) * scales[i] * scales[n + j] * rng.gen_range(0.5..=1.0)))
        .collect();
    Ok(MatrixGameSpec { a: SparseMatrix::from_triplets(n, d, &triplets)?, decomposition })
}

/// `n × d` box-simplex instance with `b = A z₀` for `z₀` in the box. Column
/// `j` is scaled so that `λ_j = σ_j / √p_j` follows the profile exactly.
pub fn generate_box_simplex(params: &GenParams) -> Result<BoxSimplexSpec> {
    params.validate()?;
    let (n, d) = (params.n, params.d);
    let mut rng = params.rng();
    let entries = pattern(n, d, params.density, true, &mut rng);
    // λ ∝ σ^{4/5} under p ∝ σ^{2/5}.
    let sigma = power_law(d, params.exponent * 1.25, &mut rng);
    let mut by_col: Vec<Vec<usize>> = vec![Vec::new(); d];
    for &(i, j) in &entries {
        by_col[j].push(i);
    }
    let mut triplets = Vec::with_capacity(entries.len());
    for (j, rows) in by_col.iter().enumerate() {
        let lead = rng.gen_range(0..rows.len());
        for (t, &i) in rows.iter().enumerate() {
            let u = if t == lead { 1.0 } else { rng.gen_range(0.0..=1.0) };
            triplets.push((i, j, sign(&mut rng) * sigma[j] * u));
        }
    }
    let a = SparseMatrix::from_triplets(n, d, &triplets)?;
    let z: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let b = a.mul_vec(&z);
    Ok(BoxSimplexSpec { a, b })
}

/// Policy evaluation on `n` states with `dim` features. Each state moves to
/// its successor on a cycle plus up to two random states, features are
/// Gaussian with state `s` scaled by `r_s^{−exponent/2}`, and `Φ` is then
/// rescaled so the operator `Φᵀ M (I − βP) Φ` has modulus `2μ`.
pub fn generate_policy_eval(n: usize, dim: usize, beta: f64, mu: f64, exponent: f64, seed: u64) -> Result<PolicyEvalSpec> {
    if n == 0 || dim == 0 || dim > n {
        return Err(Error::InvalidArgument("need 1 <= dim <= n".into()));
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidArgument("mu must be positive".into()));
    }
    if !(exponent >= 0.0 && exponent.is_finite()) {
        return Err(Error::InvalidArgument("exponent must be finite and nonnegative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut transition = DMatrix::<f64>::zeros(n, n);
    for s in 0..n {
        let mut weights = vec![((s + 1) % n, rng.gen_range(0.5..=1.0))];
        for _ in 0..2 {
            weights.push((rng.gen_range(0..n), rng.gen_range(0.0..=1.0)));
        }
        let total: f64 = weights.iter().map(|w| w.1).sum();
        for (t, w) in weights {
            transition[(s, t)] += w / total;
        }
        let row_sum: f64 = transition.row(s).sum();
        transition.row_mut(s).scale_mut(1.0 / row_sum);
    }
    let scales = power_law(n, exponent / 2.0, &mut rng);
    let mut features = DMatrix::<f64>::zeros(n, dim);
    for s in 0..n {
        for c in 0..dim {
            features[(s, c)] = scales[s] * rng.sample::<f64, _>(StandardNormal);
        }
    }
    let rewards: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..=1.0)).collect();
    let mut spec = PolicyEvalSpec { transition, features, rewards, beta, mu };
    let modulus = super::policy_eval_modulus(&spec)?;
    if !(modulus > 0.0) {
        return Err(Error::InvalidArgument("generated features are rank deficient".into()));
    }
    spec.features *= (2.0 * mu / modulus).sqrt();
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::make_lad;

    #[test]
    fn uniform_lad_profile() {
        let spec = generate_lad(&GenParams::new(10, 10, 0.0, 1)).unwrap();
        let inst = make_lad(&spec).unwrap();
        let profile = &inst.profile;
        let m = profile.len() as f64;
        assert_eq!(profile.len(), 100);
        assert!(profile.lambda().iter().all(|&l| l == 1.0));
        assert!((profile.norm_half() / (m * m * profile.norm_inf()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn concentrated_profile() {
        let spec = generate_lad(&GenParams::new(10, 10, 3.0, 2)).unwrap();
        let profile = make_lad(&spec).unwrap().profile;
        assert_eq!(profile.len(), 100);
        let ratio = profile.norm_half() / profile.norm_inf();
        let oracle: f64 = (1..=100).map(|r| (r as f64).powf(-1.5)).sum::<f64>().powi(2);
        assert!((ratio - oracle).abs() < 1e-9 * oracle);
        assert!(ratio <= 10.0);
    }

    #[test]
    fn deterministic() {
        let p = GenParams::new(7, 5, 1.0, 9).density(0.4);
        assert_eq!(generate_lad(&p).unwrap(), generate_lad(&p).unwrap());
        assert_eq!(generate_box_simplex(&p).unwrap(), generate_box_simplex(&p).unwrap());
        let g = generate_matrix_game(&p, GameDecomposition::TwoSided).unwrap();
        assert_eq!(g, generate_matrix_game(&p, GameDecomposition::TwoSided).unwrap());
        assert_ne!(generate_lad(&p).unwrap(), generate_lad(&GenParams { seed: 10, ..p }).unwrap());
    }

    #[test]
    fn coverage() {
        let p = GenParams::new(12, 9, 2.0, 3).density(0.05);
        let g = generate_matrix_game(&p, GameDecomposition::TwoSided).unwrap();
        assert!((0..12).all(|i| g.a.row_nnz(i) > 0));
        assert!((0..9).all(|j| g.a.col_nnz(j) > 0));
        let l = generate_lad(&p).unwrap();
        assert!((0..12).all(|i| l.a.row_nnz(i) > 0));
    }

    #[test]
    fn policy_modulus_is_two_mu() {
        let spec = generate_policy_eval(10, 5, 0.9, 0.1, 0.0, 4).unwrap();
        let modulus = crate::problems::policy_eval_modulus(&spec).unwrap();
        assert!((modulus - 0.2).abs() < 1e-10);
    }
}
