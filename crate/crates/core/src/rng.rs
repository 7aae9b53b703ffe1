//! Minimal deterministic PRNG used by the synthetic generator.
//!
//! SplitMix64 with purpose-tagged streams: every consumer derives its own
//! stream from `(seed, tag)`, so adding a draw to one stream never shifts
//! the values another stream sees. Pure integer arithmetic, bit-identical
//! on every platform.

/// SplitMix64 state.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi] for lo <= hi.
    pub fn next_range(&mut self, lo: u64, hi: u64) -> u64 {
        debug_assert!(lo <= hi);
        let span = hi - lo + 1;
        if span == 0 {
            // Full u64 range.
            return self.next_u64();
        }
        lo + self.next_u64() % span
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xCBF2_9CE4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    hash
}

/// Stream keyed by `(seed, tag)`.
pub fn stream(seed: u64, tag: &str) -> SplitMix64 {
    SplitMix64::new(seed ^ fnv1a(tag.as_bytes()))
}

/// Stream keyed by `(seed, tag, n)`, for per-item sub-streams.
pub fn stream_n(seed: u64, tag: &str, n: u64) -> SplitMix64 {
    let mut mixer = SplitMix64::new(fnv1a(tag.as_bytes()).wrapping_add(n));
    SplitMix64::new(seed ^ mixer.next_u64())
}

/// Derived seed for item `n` of a keyed collection.
pub fn sub_seed(seed: u64, tag: &str, n: u64) -> u64 {
    stream_n(seed, tag, n).next_u64()
}
