use std::collections::BTreeSet;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Batch entities plus `n` extra negatives sampled without replacement from
/// the entities outside the batch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NegativeBatch<T> {
    pub batch: BTreeSet<T>,
    pub extras: Vec<T>,
    pub union: BTreeSet<T>,
}

pub fn build_negative_batch<T: Ord + Clone>(
    batch: &BTreeSet<T>,
    all: &BTreeSet<T>,
    n: usize,
    seed: u64,
) -> NegativeBatch<T> {
    let pool: Vec<&T> = all.iter().filter(|e| !batch.contains(e)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let extras: Vec<T> = pool
        .choose_multiple(&mut rng, n.min(pool.len()))
        .map(|e| (*e).clone())
        .collect();
    let union = batch.iter().cloned().chain(extras.iter().cloned()).collect();
    NegativeBatch {
        batch: batch.clone(),
        extras,
        union,
    }
}
