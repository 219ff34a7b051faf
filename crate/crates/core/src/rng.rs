//! Named, counter-addressable random streams.
//!
//! Every source of randomness in the twin and the agents draws from its own
//! [`RngStream`]. A stream is fully described by its [`RngCursor`], so state
//! snapshots, forks and checkpoints reproduce the exact same future draws.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Stream identifiers. Each consumer of randomness owns exactly one.
pub mod streams {
    pub const PLACEMENT: u64 = 1;
    pub const TRAFFIC: u64 = 2;
    pub const MOBILITY: u64 = 3;
    pub const SHADOWING: u64 = 4;
    pub const HARQ: u64 = 5;
    pub const AGENT: u64 = 6;
}

/// Position of a stream: `(seed, stream_id, draw_count)`.
///
/// `draw_count` counts 32-bit words consumed from the underlying ChaCha
/// keystream, so it advances by two per `u64`/`f64` draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngCursor {
    pub seed: u64,
    pub stream_id: u64,
    pub draw_count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { seed, stream_id, rng }
    }

    pub fn from_cursor(cursor: RngCursor) -> Self {
        let mut s = Self::new(cursor.seed, cursor.stream_id);
        s.rng.set_word_pos(u128::from(cursor.draw_count));
        s
    }

    pub fn cursor(&self) -> RngCursor {
        RngCursor {
            seed: self.seed,
            stream_id: self.stream_id,
            draw_count: self.rng.get_word_pos() as u64,
        }
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `[lo, hi)`; returns `lo` when the range is empty.
    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        let u = self.uniform();
        if hi > lo {
            lo + (hi - lo) * u
        } else {
            lo
        }
    }

    /// Uniform index in `0..n` (n ≥ 1), via rejection sampling so every index
    /// is exactly equiprobable.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index() over an empty range");
        let n = n as u64;
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let v = self.rng.next_u64();
            if v < zone {
                return (v % n) as usize;
            }
        }
    }

    /// Mutable access for `rand_distr` samplers.
    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

impl Serialize for RngStream {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.cursor().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RngStream {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        RngCursor::deserialize(deserializer).map(Self::from_cursor)
    }
}

/// SplitMix64 finalizer, used to derive child seeds.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for an independent child derived from `(seed, tti, ordinal)`.
pub fn derive_seed(seed: u64, tti: u64, ordinal: u64) -> u64 {
    mix64(mix64(mix64(seed) ^ tti) ^ ordinal.rotate_left(17))
}
