//! Reproducible random streams addressed by path.
//!
//! A [`SeedSpec`] names a stream by a master seed plus a path of small
//! integers (replicate, construction step, column, slice, ...). The path is
//! hashed into a ChaCha12 key, so any sub-stream can be opened directly
//! without generating its siblings first. Deriving a child never touches the
//! parent.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

/// Generator identifier written into every output header.
pub const GENERATOR_NAME: &str = "chacha12-splitmix-path";
/// Bumped whenever the path-to-key derivation or any draw order changes.
pub const GENERATOR_VERSION: u32 = 1;

/// Address of a random stream: master seed plus sub-stream path.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_path: Vec<u64>,
}

impl SeedSpec {
    pub fn new(master_seed: u64) -> Self {
        Self {
            master_seed,
            stream_path: Vec::new(),
        }
    }

    /// Sub-stream at `self.stream_path ++ [index]`.
    pub fn child(&self, index: u64) -> Self {
        let mut stream_path = self.stream_path.clone();
        stream_path.push(index);
        Self {
            master_seed: self.master_seed,
            stream_path,
        }
    }

    /// Sub-stream at `self.stream_path ++ indices`.
    pub fn descend(&self, indices: &[u64]) -> Self {
        let mut stream_path = self.stream_path.clone();
        stream_path.extend_from_slice(indices);
        Self {
            master_seed: self.master_seed,
            stream_path,
        }
    }

    fn key(&self) -> [u8; 32] {
        let mut state = splitmix(self.master_seed ^ 0x5EED_5A4A_0000_0001);
        for (depth, &index) in self.stream_path.iter().enumerate() {
            let tagged = splitmix(index.wrapping_add((depth as u64 + 1).wrapping_mul(GOLDEN)));
            state = splitmix(state ^ tagged);
        }
        // length tag separates [] from [0], [0] from [0, 0], ...
        state = splitmix(state ^ (self.stream_path.len() as u64).wrapping_mul(GOLDEN));
        let mut key = [0u8; 32];
        let mut word = state;
        for chunk in key.chunks_exact_mut(8) {
            word = splitmix(word.wrapping_add(GOLDEN));
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        key
    }

    /// Open a fresh stream positioned at the start of this address.
    pub fn stream(&self) -> Stream {
        Stream {
            rng: ChaCha12Rng::from_seed(self.key()),
        }
    }
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A positioned random stream. Not shared across workers; open one per task.
#[derive(Debug, Clone)]
pub struct Stream {
    rng: ChaCha12Rng,
}

impl Stream {
    /// Uniform draw on [0, 1) with 53 bits of precision.
    pub fn uniform_unit(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform random permutation of `1..=k` (Fisher-Yates).
    pub fn uniform_permutation(&mut self, k: usize) -> Result<Vec<usize>> {
        if k == 0 {
            return Err(Error::InvalidArgument(
                "permutation length must be at least 1".into(),
            ));
        }
        let mut perm: Vec<usize> = (1..=k).collect();
        perm.shuffle(&mut self.rng);
        Ok(perm)
    }

    /// Uniform random permutation of `0..k`, for internal index shuffles.
    pub(crate) fn shuffled_indices(&mut self, k: usize) -> Vec<usize> {
        let mut perm: Vec<usize> = (0..k).collect();
        perm.shuffle(&mut self.rng);
        perm
    }
}
