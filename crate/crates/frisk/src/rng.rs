//! Splittable, counter-based random number streams.
//!
//! Every stochastic routine in this crate draws from an [`RngStream`]: a pair
//! (seed, stream id) identifying one ChaCha12 keystream. Streams are cheap
//! values, not stateful generators; materialize one with [`RngStream::rng`]
//! when draws are needed. Two properties carry all reproducibility guarantees:
//!
//! * identical (seed, stream) yields a bitwise-identical draw sequence;
//! * distinct stream ids index statistically independent keystreams.
//!
//! Derivation is hierarchical: `child(i)` mixes the index into the stream id
//! through SplitMix64 (bijective in `i` for a fixed parent, so siblings never
//! collide), and `named(s)` derives by FNV-1a hash of a label. Monte Carlo
//! code assigns one child stream per path, which makes every estimate
//! independent of worker count and scheduling order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Identifier of one reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    seed: u64,
    stream: u64,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer; bijective on u64.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a over the label bytes; stable across platforms.
fn fnv1a(name: &str) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for b in name.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

impl RngStream {
    /// Root stream of a run. All other streams should derive from this one.
    pub fn new(seed: u64) -> Self {
        RngStream { seed, stream: 0 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream
    }

    /// Child stream for index `i`. Bijective in `i` for a fixed parent.
    pub fn child(&self, i: u64) -> Self {
        RngStream {
            seed: self.seed,
            stream: splitmix64(self.stream ^ i.wrapping_mul(GOLDEN) ^ 0x5851_F42D_4C95_7F2D),
        }
    }

    /// Child stream keyed by a component label, e.g. `named("mc-paths")`.
    pub fn named(&self, name: &str) -> Self {
        self.child(fnv1a(name))
    }

    /// Materialize the ChaCha12 generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}
