//! Portable pseudo-random streams.
//!
//! Model files must be reproducible bit-for-bit on every platform, so the
//! generator is defined here rather than borrowed from a library whose
//! output may change between versions.
//!
//! The generator is SplitMix64:
//!
//! ```text
//! state  <- state + 0x9E3779B97F4A7C15        (wrapping)
//! z      <- state
//! z      <- (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z      <- (z ^ (z >> 27)) * 0x94D049BB133111EB
//! output <- z ^ (z >> 31)
//! ```
//!
//! Bounded integers use Lemire's multiply-shift with rejection, so every
//! draw in `[0, n)` is exactly uniform. Tree `t` of a forest trained with
//! seed `s` starts from state `s ^ t`.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// The stream used for tree `index` of a forest seeded with `seed`.
    pub fn for_stream(seed: u64, index: u64) -> Self {
        SplitMix64::new(seed ^ index)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform integer in `[0, bound)`. `bound` must be non-zero.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "below() needs a positive bound");
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let product = u128::from(self.next_u64()) * u128::from(bound);
            if (product as u64) >= threshold {
                return (product >> 64) as u64;
            }
        }
    }

    /// Uniform real in `[0, 1)` built from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// `k` distinct indices from `0..n`, drawn by a partial Fisher-Yates
    /// shuffle and returned in draw order.
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n, "cannot draw {k} distinct values from {n}");
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below((n - i) as u64) as usize;
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_reference_splitmix_outputs() {
        // First outputs of the reference C implementation seeded with 0.
        let mut rng = SplitMix64::new(0);
        assert_eq!(rng.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(rng.next_u64(), 0x6E78_9E6A_A1B9_65F4);
        assert_eq!(rng.next_u64(), 0x06C4_5D18_8009_454F);
    }

    #[test]
    fn below_stays_in_range() {
        let mut rng = SplitMix64::new(42);
        for bound in [1u64, 2, 3, 7, 1000, u64::MAX] {
            for _ in 0..200 {
                assert!(rng.below(bound) < bound);
            }
        }
    }

    #[test]
    fn sample_indices_are_distinct() {
        let mut rng = SplitMix64::new(7);
        let mut drawn = rng.sample_indices(18, 9);
        assert_eq!(drawn.len(), 9);
        drawn.sort_unstable();
        drawn.dedup();
        assert_eq!(drawn.len(), 9);
        assert!(drawn.iter().all(|&i| i < 18));
    }

    #[test]
    fn streams_differ_per_index() {
        let a = SplitMix64::for_stream(5, 0).next_u64();
        let b = SplitMix64::for_stream(5, 1).next_u64();
        assert_ne!(a, b);
    }
}
