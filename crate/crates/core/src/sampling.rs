//! Component distributions `p`, `q`, alias sampling and seeded draw streams.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::operator::{lpq_bound, LipschitzProfile};

/// Smallest probability accepted after normalization.
pub const MIN_PROBABILITY: f64 = 1e-15;

/// Vose alias table: O(m) build, one uniform draw per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<u32>,
}

impl AliasTable {
    /// `probabilities` must be a valid distribution.
    pub fn new(probabilities: &[f64]) -> Self {
        let m = probabilities.len();
        let mut prob: Vec<f64> = probabilities.iter().map(|p| p * m as f64).collect();
        let mut alias: Vec<u32> = (0..m as u32).collect();
        let (mut small, mut large): (Vec<usize>, Vec<usize>) = (0..m).partition(|&i| prob[i] < 1.0);
        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            alias[s] = l as u32;
            prob[l] -= 1.0 - prob[s];
            if prob[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // Leftovers are 1 up to rounding.
        for i in small.into_iter().chain(large) {
            prob[i] = 1.0;
            alias[i] = i as u32;
        }
        Self { prob, alias }
    }

    pub fn len(&self) -> usize {
        self.prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prob.is_empty()
    }

    /// Maps one 64-bit word to an index.
    #[inline]
    pub fn sample_word(&self, word: u64) -> usize {
        let m = self.prob.len();
        let u = (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let t = u * m as f64;
        let i = (t as usize).min(m - 1);
        if t - (i as f64) < self.prob[i] {
            i
        } else {
            self.alias[i] as usize
        }
    }
}

/// Seeded draw stream. The generator is ChaCha8 (`rand_chacha`), one `u64`
/// per draw, so draw `n` of seed `s` is a pure function of `(s, n)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    counter: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, counter: 0, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Stream positioned so that the next draw is draw number `counter`.
    pub fn at(seed: u64, counter: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_word_pos(2 * counter as u128);
        Self { seed, counter, rng }
    }

    /// An independent generator for auxiliary randomness tied to `seed`.
    pub fn auxiliary(seed: u64, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        rng
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    #[inline]
    pub fn next_word(&mut self) -> u64 {
        self.counter += 1;
        self.rng.next_u64()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SamplingMode {
    Uniform,
    Importance,
    Custom { p: Vec<f64>, q: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    P,
    Q,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPlan {
    p: Vec<f64>,
    q: Vec<f64>,
    alias_p: AliasTable,
    alias_q: AliasTable,
    q_min: f64,
    j_star: usize,
    lpq: f64,
}

/// Normalizes nonnegative weights into a distribution.
pub fn normalize(weights: &[f64]) -> Result<Vec<f64>> {
    if weights.is_empty() {
        return Err(Error::InvalidArgument("empty weight vector".into()));
    }
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::NonFinite("sampling weights"));
    }
    if let Some(index) = weights.iter().position(|&w| w <= 0.0) {
        return Err(Error::ZeroWeight { index });
    }
    let total: f64 = weights.iter().sum();
    let p: Vec<f64> = weights.iter().map(|w| w / total).collect();
    if let Some(index) = p.iter().position(|&v| v < MIN_PROBABILITY) {
        return Err(Error::ZeroWeight { index });
    }
    Ok(p)
}

/// `w_j^exponent`, rejecting zero weights by index.
pub fn power_weights(values: &[f64], exponent: f64) -> Result<Vec<f64>> {
    if let Some(index) = values.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::ZeroWeight { index });
    }
    Ok(values.iter().map(|v| v.powf(exponent)).collect())
}

impl SamplingPlan {
    /// Plan with `L_{p,q}` taken from the generic component bound.
    pub fn new(p: Vec<f64>, q: Vec<f64>, profile: &LipschitzProfile) -> Result<Self> {
        let lpq = lpq_bound(profile, &p, &q)?;
        Self::with_lpq(p, q, lpq)
    }

    /// Plan with a caller-supplied `L_{p,q}` (e.g. a structure-aware bound).
    pub fn with_lpq(p: Vec<f64>, q: Vec<f64>, lpq: f64) -> Result<Self> {
        if p.len() != q.len() {
            return Err(Error::InvalidArgument("p and q have different lengths".into()));
        }
        crate::operator::check_distribution(&p, p.len(), "p")?;
        crate::operator::check_distribution(&q, q.len(), "q")?;
        for v in [&p, &q] {
            if let Some(index) = v.iter().position(|&x| x < MIN_PROBABILITY) {
                return Err(Error::ZeroWeight { index });
            }
        }
        if !(lpq > 0.0 && lpq.is_finite()) {
            return Err(Error::InvalidArgument(format!("L_pq must be positive, got {lpq}")));
        }
        let (j_star, q_min) = q
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (j, v)| if v < best.1 { (j, v) } else { best });
        Ok(Self { alias_p: AliasTable::new(&p), alias_q: AliasTable::new(&q), p, q, q_min, j_star, lpq })
    }

    pub fn m(&self) -> usize {
        self.p.len()
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn q_min(&self) -> f64 {
        self.q_min
    }

    pub fn j_star(&self) -> usize {
        self.j_star
    }

    pub fn lpq(&self) -> f64 {
        self.lpq
    }

    pub fn alias(&self, side: Side) -> &AliasTable {
        match side {
            Side::P => &self.alias_p,
            Side::Q => &self.alias_q,
        }
    }

    /// One draw from `p` or `q`; consumes exactly one word of `rng`.
    #[inline]
    pub fn sample(&self, side: Side, rng: &mut RngStream) -> usize {
        self.alias(side).sample_word(rng.next_word())
    }
}

/// Builds `p`, `q` from a Lipschitz profile.
pub fn build_plan(mode: &SamplingMode, profile: &LipschitzProfile) -> Result<SamplingPlan> {
    let m = profile.len();
    match mode {
        SamplingMode::Uniform => {
            let u = vec![1.0 / m as f64; m];
            SamplingPlan::new(u.clone(), u, profile)
        }
        SamplingMode::Importance => {
            let roots: Vec<f64> = profile.lambda().iter().map(|l| l.sqrt()).collect();
            let mean = roots.iter().sum::<f64>() / m as f64;
            let p = normalize(&roots)?;
            let clipped: Vec<f64> = roots.iter().map(|r| r.max(mean)).collect();
            let q = normalize(&clipped)?;
            SamplingPlan::new(p, q, profile)
        }
        SamplingMode::Custom { p, q } => SamplingPlan::new(p.clone(), q.clone(), profile),
    }
}
