use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Replayable source of randomness attached to an instance or a run.
///
/// A tape never hands out a shared generator. Every consumer asks for a
/// numbered substream, so a draw for item 3 does not depend on how many
/// numbers were consumed for item 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomTape {
    pub seed: u64,
    pub stream_id: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RandomTape {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RandomTape { seed, stream_id }
    }

    /// Generator for substream `sub`; identical arguments give identical draws.
    pub fn rng(&self, sub: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(self.seed ^ splitmix64(self.stream_id)));
        rng.set_stream(sub);
        rng
    }

    /// A tape with the same seed and a stream id derived from `tag`.
    pub fn derive(&self, tag: u64) -> RandomTape {
        RandomTape {
            seed: self.seed,
            stream_id: splitmix64(self.stream_id.wrapping_mul(0x2545_F491_4F6C_DD1D) ^ tag),
        }
    }
}
