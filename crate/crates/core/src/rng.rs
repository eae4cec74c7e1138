//! Index-keyed random substreams.
//!
//! Every random quantity is drawn from a ChaCha stream selected by
//! `(seed, tag, index)`, so a weight row or data column is the same no
//! matter in which order (or on which thread) it is generated.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum Stream {
    DataColumn = 1,
    DataFrame = 2,
    Labels = 3,
    Hidden = 4,
    Output = 5,
    Bias = 6,
    Batch = 7,
    Noise = 8,
    Probe = 9,
    DeepLayer = 10,
}

const INDEX_BITS: u32 = 56;

/// Random stream keyed by `(seed, tag, index)`; `index` must fit in 56 bits.
pub fn substream(seed: u64, tag: Stream, index: u64) -> ChaCha8Rng {
    debug_assert!(index < (1u64 << INDEX_BITS));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((tag as u64) << INDEX_BITS) | (index & ((1u64 << INDEX_BITS) - 1)));
    rng
}

/// Two-level key packed as `hi << 28 | lo` (both below 2^28).
pub fn substream2(seed: u64, tag: Stream, hi: u64, lo: u64) -> ChaCha8Rng {
    debug_assert!(hi < (1 << 28) && lo < (1 << 28));
    substream(seed, tag, (hi << 28) | lo)
}

pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn fill_normal<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64], std_dev: f64) {
    for v in out.iter_mut() {
        *v = std_dev * normal(rng);
    }
}
