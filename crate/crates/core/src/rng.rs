//! Reproducible random streams.
//!
//! A master seed is expanded into a tree of keys. Every key drives a family
//! of ChaCha8 streams addressed by a 64-bit stream id, so stream `i` of a
//! key is `ChaCha8(key = hash(master, labels...), stream = i)`. Work split
//! into fixed-size chunks, each on its own stream, gives results that do
//! not depend on how many threads ran the chunks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type Stream = ChaCha8Rng;

/// Number of trials drawn from one stream in chunked sampling.
pub const CHUNK_SIZE: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedTree {
    key: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a, for turning readable labels into tree branches.
pub fn label(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

impl SeedTree {
    pub fn new(master: u64) -> Self {
        Self { key: splitmix64(master) }
    }

    pub fn child(&self, branch: u64) -> Self {
        Self { key: splitmix64(self.key ^ splitmix64(branch.wrapping_add(0x6A09_E667_F3BC_C909))) }
    }

    pub fn named(&self, name: &str) -> Self {
        self.child(label(name))
    }

    pub fn stream(&self, index: u64) -> Stream {
        let mut seed = [0u8; 32];
        let mut state = self.key;
        for chunk in seed.chunks_exact_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(index);
        rng
    }
}

/// Splits `total` trials into [`CHUNK_SIZE`] chunks and runs `work(start, len, rng)`
/// on each chunk in parallel; results come back in chunk order.
pub fn chunked<T, F>(tree: &SeedTree, total: usize, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, usize, &mut Stream) -> T + Sync,
{
    let n_chunks = total.div_ceil(CHUNK_SIZE);
    (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK_SIZE;
            let len = CHUNK_SIZE.min(total - start);
            let mut rng = tree.stream(c as u64);
            work(start, len, &mut rng)
        })
        .collect()
}
