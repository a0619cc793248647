//! Seeded shuffling shared by the corpus splitter and the SVM trainer.
//!
//! The generator is SplitMix64 (64-bit state, Steele/Lea/Flood 2014) and the
//! permutation is a Fisher-Yates pass from the last index down, drawing each
//! swap position with `gen_range(0..=i)`.

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

pub type SplitRng = SplitMix64;

pub fn seeded(seed: u64) -> SplitRng {
    SplitMix64::seed_from_u64(seed)
}

/// Derive an independent stream for a numbered sub-task (class, class pair).
pub fn derived(seed: u64, stream: u64) -> SplitRng {
    seeded(seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

pub fn shuffle<T>(items: &mut [T], rng: &mut SplitRng) {
    for i in (1..items.len()).rev() {
        let j = rng.gen_range(0..=i);
        items.swap(i, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shuffle_is_a_permutation_and_reproducible() {
        let mut a: Vec<u32> = (0..50).collect();
        let mut b = a.clone();
        shuffle(&mut a, &mut seeded(9));
        shuffle(&mut b, &mut seeded(9));
        assert_eq!(a, b);
        let mut sorted = a.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..50).collect::<Vec<_>>());
        assert_ne!(a, sorted);
    }
}
