//! Seeded random streams.
//!
//! Every stream is a ChaCha8 generator keyed by a path of integers hashed
//! together with the master seed, so a given (seed, replicate, position)
//! triple always sees the same draws regardless of evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix a path of labels into a child seed.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn stream(master: u64, path: &[u64]) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, path))
}

/// Stream labels, kept distinct so sibling streams never collide.
pub mod label {
    pub const REPLICATE: u64 = 0x5245_504C;
    pub const POSITION: u64 = 0x504F_5349;
    pub const SPECULATIVE: u64 = 0x5350_4543;
    pub const TARGET_ONLY: u64 = 0x5441_5247;
}

/// One generator per token position, created on first use.
///
/// Everything random that decides the token at position `i` (draft noise,
/// verification uniforms, resampling trials, bonus draws) comes from stream `i`.
#[derive(Debug, Clone)]
pub struct PositionStreams {
    seed: u64,
    streams: Vec<Option<StreamRng>>,
}

impl PositionStreams {
    pub fn new(seed: u64) -> Self {
        PositionStreams {
            seed,
            streams: Vec::new(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn at(&mut self, position: usize) -> &mut StreamRng {
        if self.streams.len() <= position {
            self.streams.resize_with(position + 1, || None);
        }
        let seed = self.seed;
        self.streams[position].get_or_insert_with(|| stream(seed, &[label::POSITION, position as u64]))
    }
}
