//! Reproducible random streams.
//!
//! Each logical task (a Monte Carlo trial, an optimizer start) gets its own
//! ChaCha20 stream keyed by `(seed, index)`. ChaCha is counter based, so the
//! stream a task sees does not depend on how tasks are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub fn stream(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
