//! Seed derivation. Every random draw in the pipeline comes from a ChaCha
//! stream keyed by the run seed and addressed by a path of integers
//! (stage, epoch, document index, ...), so results do not depend on the
//! order in which documents are processed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub mod domain {
    pub const MLM: u64 = 1;
    pub const DAE: u64 = 2;
    pub const BALANCE: u64 = 3;
    pub const SCHEDULE: u64 = 4;
    pub const BT: u64 = 5;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent generator for `path` under `seed`.
pub fn stream(seed: u64, path: &[u64]) -> StreamRng {
    let mut key = [0u8; 32];
    let mut h = splitmix64(seed);
    for (i, chunk) in key.chunks_mut(8).enumerate() {
        chunk.copy_from_slice(&splitmix64(h ^ i as u64).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    for &p in path {
        h = splitmix64(h ^ splitmix64(p.wrapping_add(0x632b_e59b_d9b4_e019)));
    }
    rng.set_stream(h);
    rng
}
