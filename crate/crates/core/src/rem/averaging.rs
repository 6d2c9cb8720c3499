use rand::seq::index::sample;

use crate::sampling::RngStream;

/// Stream id of the generator that draws the output index set.
const INDEX_SET_STREAM: u64 = 1;

/// Draws `⌈K/m⌉` distinct iterations from `1..=K` (all of them when that is
/// at least `K`). Returned sorted.
pub fn draw_index_set(seed: u64, iterations: u64, m: usize) -> Vec<u64> {
    if iterations == 0 {
        return Vec::new();
    }
    let size = iterations.div_ceil(m as u64);
    if size >= iterations {
        return (1..=iterations).collect();
    }
    let mut rng = RngStream::auxiliary(seed, INDEX_SET_STREAM);
    let mut set: Vec<u64> =
        sample(&mut rng, iterations as usize, size as usize).into_iter().map(|i| i as u64 + 1).collect();
    set.sort_unstable();
    set
}

/// Running output average.
#[derive(Debug, Clone)]
pub(crate) enum Averager {
    /// `Σ a_i x_i / A_k`.
    Weighted { sum: Vec<f64>, weight: f64 },
    /// Plain mean over the iterations in `set` visited so far.
    Sampled { set: Vec<u64>, next: usize, sum: Vec<f64>, count: usize },
}

impl Averager {
    pub fn weighted(dim: usize) -> Self {
        Averager::Weighted { sum: vec![0.0; dim], weight: 0.0 }
    }

    pub fn sampled(dim: usize, set: Vec<u64>) -> Self {
        Averager::Sampled { set, next: 0, sum: vec![0.0; dim], count: 0 }
    }

    /// Whether iteration `k` contributes.
    pub fn wants(&self, k: u64) -> bool {
        match self {
            Averager::Weighted { .. } => true,
            Averager::Sampled { set, next, .. } => set.get(*next) == Some(&k),
        }
    }

    pub fn add(&mut self, a: f64, x: &[f64]) {
        match self {
            Averager::Weighted { sum, weight } => {
                sum.iter_mut().zip(x).for_each(|(s, v)| *s += a * v);
                *weight += a;
            }
            Averager::Sampled { next, sum, count, .. } => {
                sum.iter_mut().zip(x).for_each(|(s, v)| *s += v);
                *next += 1;
                *count += 1;
            }
        }
    }

    /// Current average, or `None` before the first contribution.
    pub fn current(&self) -> Option<Vec<f64>> {
        let (sum, w) = match self {
            Averager::Weighted { sum, weight } => (sum, *weight),
            Averager::Sampled { sum, count, .. } => (sum, *count as f64),
        };
        (w > 0.0).then(|| sum.iter().map(|s| s / w).collect())
    }
}
