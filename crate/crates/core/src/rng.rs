//! Seed to stream protocol.
//!
//! A run seed is expanded with SplitMix64 into a 256-bit ChaCha8 key. Every
//! Monte Carlo sample gets its own ChaCha stream number
//! `(stream_id << 40) | sample_index`, so a sample depends only on
//! `(seed, stream, index)` and never on thread scheduling or on how many
//! samples other streams drew.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type SampleRng = ChaCha8Rng;

const INDEX_BITS: u32 = 40;

/// Named sub-streams of one run seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stream {
    Calibration,
    Scenario,
    ValueSweep,
    Toy,
    Oracle,
    Custom(u16),
}

impl Stream {
    pub fn id(self) -> u64 {
        match self {
            Stream::Calibration => 1,
            Stream::Scenario => 2,
            Stream::ValueSweep => 3,
            Stream::Toy => 4,
            Stream::Oracle => 5,
            Stream::Custom(k) => 0x100 + k as u64,
        }
    }
}

pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn key(seed: u64) -> [u8; 32] {
    let mut state = seed;
    let mut out = [0u8; 32];
    for chunk in out.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    out
}

/// Generator for sample `index` of `stream` under `seed`.
pub fn sample_rng(seed: u64, stream: Stream, index: u64) -> SampleRng {
    assert!(index < 1 << INDEX_BITS, "sample index {index} exceeds stream capacity");
    let mut rng = ChaCha8Rng::from_seed(key(seed));
    rng.set_stream((stream.id() << INDEX_BITS) | index);
    rng
}
