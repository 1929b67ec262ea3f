//! Counter-based random streams for reproducible parallel replications.
//!
//! Every draw of the Monte-Carlo study comes from a ChaCha8 generator keyed
//! by the experiment seed. The replication index selects the ChaCha stream
//! and the purpose selects a disjoint block of the counter space, so the
//! random numbers a replication sees depend only on `(seed, rep, purpose)`
//! and never on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Width (in 32-bit words) of the counter block reserved for one purpose.
const BLOCK_BITS: u32 = 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Purpose {
    Design = 0,
    Errors = 1,
    Outliers = 2,
    LassoFolds = 3,
    RestrictedLassoFolds = 4,
}

pub fn stream(seed: u64, rep: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng.set_word_pos(u128::from(purpose as u8) << BLOCK_BITS);
    rng
}
