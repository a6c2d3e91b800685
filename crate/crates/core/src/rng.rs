//! Counter-based random streams keyed by (seed, sample index).
//!
//! Every Monte Carlo sample draws from its own ChaCha8 stream, so the value
//! of sample `i` depends only on `(seed, i)` and never on how the index
//! range is split across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random stream for sample `index` under `seed`.
pub fn sample_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Pairwise (tree) summation over a fixed split of the slice. The reduction
/// order depends only on the length, which makes parallel sums bit-stable.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 64;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    let (lo, hi) = values.split_at(mid);
    pairwise_sum(lo) + pairwise_sum(hi)
}
