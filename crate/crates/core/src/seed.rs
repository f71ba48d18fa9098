//! Hierarchical seeding.
//!
//! Every random quantity in a run is drawn from its own ChaCha stream keyed by
//! the master seed, a [`Stream`] tag and a sub-key (epoch, client id, ...).
//! Streams never share state, so enabling one feature (say, local shuffling)
//! cannot shift the draws seen by another (say, the encoder).

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent randomness consumers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u16)]
pub enum Stream {
    Rffm = 1,
    HdMap = 2,
    IidShuffle = 3,
    NonIidAssignment = 4,
    NonIidSplit = 5,
    EpochIndices = 6,
    IndexBlocks = 7,
    LocalShuffle = 8,
}

/// Derives reproducible RNG streams from one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedTree {
    master: u64,
}

impl SeedTree {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// RNG for `stream`, further keyed by `sub` (use 0 when unused).
    pub fn rng(&self, stream: Stream, sub: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(self.master ^ splitmix64(sub)));
        rng.set_stream(stream as u64);
        rng
    }

    /// Like [`SeedTree::rng`] with a two-part sub-key.
    pub fn rng2(&self, stream: Stream, a: u64, b: u64) -> ChaCha8Rng {
        self.rng(stream, splitmix64(a).wrapping_add(b.rotate_left(32)))
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
