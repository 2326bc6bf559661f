//! Seeding contract for reproducible runs.
//!
//! Every trial owns a ChaCha8 generator keyed by the master seed and using
//! the trial index as its stream number. Streams are independent, so trial
//! `i` sees the same random sequence whatever thread executes it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

pub fn trial_rng(master_seed: u64, trial: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}
