//! Seeded random streams.
//!
//! Every consumer of randomness gets its own ChaCha stream keyed by
//! `(seed, purpose)` and selected by the trial index through the cipher's
//! stream counter, so trial `t` sees the same numbers whatever order trials
//! run in.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Purpose {
    Oracle,
    Algorithm,
    Truth,
    Space,
    /// Tie-breaking when an estimate is read out mid-run.
    Readout,
}

impl Purpose {
    fn key(self) -> u64 {
        match self {
            Purpose::Oracle => 0x6f72_6163_6c65,
            Purpose::Algorithm => 0x616c_676f,
            Purpose::Truth => 0x0074_7275_7468,
            Purpose::Space => 0x0073_7061_6365,
            Purpose::Readout => 0x0072_6561_646f_7574,
        }
    }
}

pub fn stream(seed: u64, trial: u64, purpose: Purpose) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ purpose.key().rotate_left(17));
    rng.set_stream(trial);
    rng
}
