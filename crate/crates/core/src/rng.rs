//! Counter-based random substreams.
//!
//! Every draw is addressed by `(master seed, domain, stream, block)`: the
//! master seed and domain select a ChaCha8 key, the stream index selects the
//! ChaCha nonce and the block index selects a 2^32-word window of the
//! keystream. A substream therefore never depends on how many other
//! substreams were consumed before it, which keeps reports identical for any
//! worker count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Default master seed used by the CLI when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 0x5EED_0F_7E3A_2016;

/// Keystream window per block, in 32-bit words.
const BLOCK_WORDS_LOG2: u32 = 32;
const MAX_BLOCK: u64 = 1 << 36;

/// Independent purposes that must never share keystream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Trials = 1,
    Bootstrap = 2,
    Synthesis = 3,
    Auxiliary = 4,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Keyed generator factory for one (master seed, domain) pair.
#[derive(Clone, Debug)]
pub struct StreamFactory {
    prototype: ChaCha8Rng,
}

impl StreamFactory {
    pub fn new(master_seed: u64, domain: Domain) -> Self {
        let mut state = master_seed ^ (domain as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        Self {
            prototype: ChaCha8Rng::from_seed(key),
        }
    }

    /// Generator positioned at `(stream, block)`.
    pub fn substream(&self, stream: u64, block: u64) -> ChaCha8Rng {
        assert!(block < MAX_BLOCK, "block index {block} exceeds the keystream window");
        let mut rng = self.prototype.clone();
        rng.set_stream(stream);
        rng.set_word_pos((block as u128) << BLOCK_WORDS_LOG2);
        rng
    }

    /// Whole-stream generator, used where one sequential stream suffices.
    pub fn stream(&self, stream: u64) -> ChaCha8Rng {
        self.substream(stream, 0)
    }
}
