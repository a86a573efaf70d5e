//! Deterministic seed derivation.
//!
//! Every task (a game, a replay, a partition wave) gets its own ChaCha stream
//! derived from the master seed and a path of indices, so a parallel schedule
//! reproduces the sequential one bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The random stream handed to strategies and samplers.
pub type StreamRng = ChaCha8Rng;

// Domain tags keep unrelated sub-streams apart when they share index paths.
pub const TAG_GAME: u64 = 0x6761_6d65;
pub const TAG_PLAYER: u64 = 0x706c_6179;
pub const TAG_SAMPLE: u64 = 0x7361_6d70;
pub const TAG_PARTITION: u64 = 0x7061_7274;
pub const TAG_RANK: u64 = 0x7261_6e6b;
pub const TAG_REPRODUCE: u64 = 0x7265_7072;
pub const TAG_INIT: u64 = 0x696e_6974;
pub const TAG_RUN: u64 = 0x7275_6e00;
pub const TAG_REPLAY: u64 = 0x7265_706c;
pub const TAG_POOL: u64 = 0x706f_6f6c;
pub const TAG_VALIDATE: u64 = 0x7661_6c69;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds an index path into a child seed.
pub fn derive(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix(master), |acc, &p| splitmix(acc ^ splitmix(p)))
}

pub fn stream(master: u64, path: &[u64]) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive(master, path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paths_are_order_sensitive() {
        assert_ne!(derive(1, &[2, 3]), derive(1, &[3, 2]));
        assert_ne!(derive(1, &[2]), derive(1, &[2, 0]));
        assert_eq!(derive(7, &[1, 2, 3]), derive(7, &[1, 2, 3]));
    }
}
