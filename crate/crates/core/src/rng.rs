//! Deterministic seeded generator for all sampled verification modes.
//!
//! SplitMix64, fixed by its update equations so that sampled suites are
//! reproducible across languages:
//!
//! ```text
//! state := state + 0x9E3779B97F4A7C15              (mod 2^64)
//! z := state
//! z := (z XOR (z >> 30)) * 0xBF58476D1CE4E5B9      (mod 2^64)
//! z := (z XOR (z >> 27)) * 0x94D049BB133111EB      (mod 2^64)
//! output := z XOR (z >> 31)
//! ```
//!
//! `below(n)` uses rejection sampling on the top multiple of `n`, so the
//! draw sequence is also language-independent.

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in `[0, n)`. `n` must be nonzero.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let limit = u64::MAX - u64::MAX % n;
        loop {
            let v = self.next_u64();
            if v < limit {
                return v % n;
            }
        }
    }

    /// Uniform signed draw in `[-bound, bound]`.
    pub fn signed(&mut self, bound: u64) -> i64 {
        self.below(2 * bound + 1) as i64 - bound as i64
    }
}
