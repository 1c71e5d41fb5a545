//! Deterministic counter-based random streams for the Monte Carlo oracle.
//!
//! Each replication gets its own stream keyed by `(seed, replication
//! index)`, so results do not depend on how replications are partitioned
//! across threads. The generator is splitmix64: fast, platform-stable, and
//! statistically adequate for sampling Bernoulli events. Not for secrets.

/// A splitmix64 stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stream {
    state: u64,
}

impl Stream {
    /// Stream for one `(seed, counter)` key. The key is mixed through one
    /// splitmix64 step so that consecutive counters land far apart.
    pub fn keyed(seed: u64, counter: u64) -> Self {
        let mut s = Stream {
            state: seed ^ counter.wrapping_mul(0x9E37_79B9_7F4A_7C15),
        };
        s.next_u64();
        s
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Bernoulli draw. `p >= 1` always fires; `p <= 0` never does.
    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }
}
