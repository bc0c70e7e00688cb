//! Seeded random streams.
//!
//! Every random draw in the crate comes from a ChaCha stream keyed by
//! `(master seed, substream)` and selected by the replica index through the
//! ChaCha stream id. Replicas therefore never share generator state, and a
//! replica's draws do not depend on how many workers ran or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator type handed to all samplers.
pub type StreamRng = ChaCha8Rng;

/// Substream tags. Distinct purposes inside one replica use distinct keys.
pub mod substream {
    pub const MATRIX: u64 = 1;
    pub const BROWNIAN: u64 = 2;
    pub const MEASURE: u64 = 3;
    pub const AUX: u64 = 4;
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Identifies one independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamId {
    pub seed: u64,
    pub replica: u64,
    pub substream: u64,
}

impl StreamId {
    pub fn new(seed: u64, replica: u64, substream: u64) -> Self {
        StreamId {
            seed,
            replica,
            substream,
        }
    }

    /// Builds the generator for this stream.
    pub fn rng(&self) -> StreamRng {
        let mut state = self.seed ^ self.substream.rotate_left(32);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.replica);
        rng
    }
}

/// Shorthand for `StreamId::new(seed, replica, substream).rng()`.
pub fn stream(seed: u64, replica: u64, substream: u64) -> StreamRng {
    StreamId::new(seed, replica, substream).rng()
}
