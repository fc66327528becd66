//! Reproducible random streams.
//!
//! Every random draw in an experiment comes from a stream addressed by
//! `(master seed, grid point, replicate, chain)`. The first three index the
//! ChaCha8 key and the chain index selects the ChaCha stream, so the mapping
//! is injective and independent of scheduling order or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Concrete generator behind every stream.
pub type Stream = ChaCha8Rng;

/// Stream index reserved for the outer data draw of a replicate. Inner
/// bootstrap chains use indices `1..=M`.
pub const DATA_STREAM: u64 = 0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub seed: u64,
    pub point: u64,
    pub replicate: u64,
}

impl StreamKey {
    pub fn new(seed: u64) -> Self {
        StreamKey {
            seed,
            point: 0,
            replicate: 0,
        }
    }

    pub fn with_point(self, point: u64) -> Self {
        StreamKey { point, ..self }
    }

    pub fn with_replicate(self, replicate: u64) -> Self {
        StreamKey { replicate, ..self }
    }

    pub fn stream(&self, chain: u64) -> Stream {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.point.to_le_bytes());
        key[16..24].copy_from_slice(&self.replicate.to_le_bytes());
        key[24..].copy_from_slice(b"bootbias");
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(chain);
        rng
    }
}

/// Stream for `(master_seed, replicate_index, chain_index)` at grid point 0.
pub fn derive_stream(master_seed: u64, replicate_index: u64, chain_index: u64) -> Stream {
    StreamKey::new(master_seed)
        .with_replicate(replicate_index)
        .stream(chain_index)
}
