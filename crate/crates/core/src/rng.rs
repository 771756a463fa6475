//! Reproducible random streams.
//!
//! A stream is keyed by `(seed, stream_id)`; work is split into fixed-size
//! blocks and block `b` draws from ChaCha stream `b` under that key, so the
//! numbers a block sees never depend on how blocks are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Number of draws per block.
pub const BLOCK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// A distinct stream derived from this one.
    pub fn substream(&self, id: u64) -> Self {
        // Keep the derived ids well away from small user-chosen ids.
        let mixed = self.stream_id.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17) ^ id;
        Self { seed: self.seed, stream_id: mixed.wrapping_add(1 << 63) }
    }

    /// Generator for block `block`.
    pub fn block_rng(&self, block: u64) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.stream_id.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(block);
        rng
    }

    /// Generator for a single sequential consumer.
    pub fn rng(&self) -> ChaCha8Rng {
        self.block_rng(0)
    }
}

/// Number of blocks covering `n` draws.
pub fn block_count(n: usize) -> usize {
    n.div_ceil(BLOCK)
}

/// Index range of block `b` among `n` draws.
pub fn block_range(b: usize, n: usize) -> std::ops::Range<usize> {
    b * BLOCK..((b + 1) * BLOCK).min(n)
}
